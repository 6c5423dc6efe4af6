//! Deterministic resampling with alpha = 1/2 on sorted one-dimensional
//! systems stays within Kolmogorov distance 1/(2N) of the weighted input.
//!
//!     cargo run --example kitagawa_bound

use resample_lab::diagnostics::{kolmogorov_weighted, random_system};
use resample_lab::resample::deterministic_alpha;

fn main() -> resample_lab::Result<()> {
    for n in [10, 100, 1000] {
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let system = random_system(n, 1, k)?;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| system.state(a)[0].total_cmp(&system.state(b)[0]));
            let sorted = system.permuted(&order);
            let r = deterministic_alpha(sorted.weights(), 0.5)?;
            let target: Vec<(f64, f64)> = (0..n).map(|i| (sorted.state(i)[0], sorted.weights()[i])).collect();
            let resampled: Vec<(f64, f64)> =
                r.ancestors.iter().map(|&a| (sorted.state(a)[0], 1.0 / n as f64)).collect();
            worst = worst.max(kolmogorov_weighted(&resampled, &target));
        }
        println!("N = {n:>4}: worst distance over 20 systems {worst:.6}, bound 1/(2N) = {:.6}", 0.5 / n as f64);
    }
    Ok(())
}
