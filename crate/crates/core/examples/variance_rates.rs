//! Decay of the conditional resampling variance with N. Ordered stratified
//! resampling beats the Monte Carlo rate 1/N; unordered stratified does not.
//!
//!     cargo run --release --example variance_rates [replicates]

use resample_lab::diagnostics::{gaussian_likelihood_system, variance_rate_fit};
use resample_lab::{Resampler, TestFn};

fn main() -> resample_lab::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let cases = [
        (1, TestFn::Tanh, (7..=13).map(|k| 1usize << k).collect::<Vec<_>>()),
        (2, TestFn::HalfL1, (8..=13).map(|k| 1usize << k).collect()),
    ];
    for (d, phi, grid) in cases {
        for name in ["stratified", "ordered-stratified"] {
            let scheme: Resampler = name.parse()?;
            let fit = variance_rate_fit(
                &scheme,
                |n| gaussian_likelihood_system(n, d, 0.5, 17),
                |x: &[f64]| phi.eval(x),
                &grid,
                reps,
                5,
            )?;
            println!("d = {d}, phi = {:<7} {name:>18}: slope {:+.3} (se {:.3})", phi.name(), fit.slope, fit.slope_se);
        }
    }
    Ok(())
}
