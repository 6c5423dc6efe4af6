//! Offspring-count covariances. Systematic resampling is not negatively
//! associated: on N W = (0.5, 0.5, 0.5, 2.5) the counts of particles 1 and 3
//! always agree. Multinomial, stratified and SSP keep covariances <= 0.
//!
//!     cargo run --release --example count_covariance

use resample_lab::diagnostics::{sample_counts, CovarianceReport};
use resample_lab::{Resampler, WeightedParticleSystem};

fn main() -> resample_lab::Result<()> {
    let system = WeightedParticleSystem::univariate(vec![0.0, 1.0, 2.0, 3.0], &[0.5, 0.5, 0.5, 2.5])?;
    let reps = 100_000;
    for name in ["systematic", "multinomial", "stratified", "ssp"] {
        let scheme: Resampler = name.parse()?;
        let samples = sample_counts(&scheme, &system, reps, 99)?;
        let cov = CovarianceReport::from_samples(&samples)?;
        let (p, se) = samples.probability(|c| c[0] == 1 && c[2] == 1);
        println!(
            "{name:>12}: Cov(#1, #3) = {:+.4} (se {:.4}), P(#1 = #3 = 1) = {p:.4} (se {se:.4}), pairs > 3 se above 0: {}",
            cov.cov(0, 2),
            cov.se(0, 2),
            cov.positive_violations(3.0).len()
        );
    }
    Ok(())
}
