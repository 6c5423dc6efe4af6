//! Variance of the log-likelihood estimate over time for the guided filter
//! under three schemes, as ratios against ordered stratified resampling.
//! Runs through the same code path as `resample-bench pf-variance`.
//!
//!     cargo run --release --example loglik_variance_ratios [replicates]

use resample_lab::bench::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let config = ExperimentConfig::from_json(&format!(
        r#"{{
            "seed": 5,
            "schemes": ["stratified", "ssp", "ordered-stratified"],
            "n_grid": [1024],
            "replicates": {reps},
            "model": {{ "dim": 5, "horizon": 50, "alpha": 0.4, "formalism": "guided" }}
        }}"#
    ))?;
    let rows = run_experiment(ExperimentKind::PfVariance, &config)?;
    println!("{:>4}  {:>28}  {:>28}", "t", "stratified/ordered-stratified", "ssp/ordered-stratified");
    for t in (5..=50).step_by(5) {
        let ratio = |pair: &str| {
            rows.iter()
                .find(|r| r.metric == "var_ratio" && r.scheme == pair && r.t == Some(t))
                .map(|r| format!("{:.3} ± {:.3}", r.value, r.se.unwrap_or(f64::NAN)))
                .unwrap_or_default()
        };
        println!("{t:>4}  {:>28}  {:>28}", ratio("stratified/ordered-stratified"), ratio("ssp/ordered-stratified"));
    }
    Ok(())
}
