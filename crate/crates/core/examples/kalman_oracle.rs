//! The bootstrap particle filter against the exact Kalman log-likelihood.
//!
//!     cargo run --release --example kalman_oracle

use resample_lab::smc::{kalman_loglik, particle_filter, simulate_lgssm, BootstrapLgssm, FilterConfig, LgssmParams};
use resample_lab::Resampler;

fn main() -> resample_lab::Result<()> {
    let params = LgssmParams::new(2, 20, 0.4)?;
    let data = simulate_lgssm(&params, 1)?;
    let exact = kalman_loglik(&params, &data.observations)?.log_likelihood;
    let model = BootstrapLgssm::new(&params, &data.observations)?;
    println!("Kalman log-likelihood {exact:.5}");
    let scheme: Resampler = "multinomial".parse()?;
    for n in [64, 256, 1024, 4096] {
        let cfg = FilterConfig::new(n, scheme);
        let errors: Vec<f64> = (0..50)
            .map(|r| particle_filter(&model, &cfg, r).map(|o| o.final_log_likelihood() - exact))
            .collect::<resample_lab::Result<_>>()?;
        let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
        let ratio = errors.iter().map(|e| e.exp()).sum::<f64>() / errors.len() as f64;
        println!("N = {n:>4}: rmse of log L {rmse:.4}, mean L / L_kalman {ratio:.4}");
    }
    Ok(())
}
