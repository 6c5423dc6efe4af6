//! The auxiliary particle filter. With eta = 1 it is the standard filter,
//! bit for bit; with the predictive eta on the guided model it is fully
//! adapted and every importance weight is equal.
//!
//!     cargo run --release --example auxiliary_filter

use resample_lab::smc::{
    auxiliary_particle_filter, kalman_loglik, particle_filter, simulate_lgssm, ApfOptions, FilterConfig,
    GuidedLgssm, LgssmParams, PredictiveAuxiliary, UnitAuxiliary,
};
use resample_lab::Resampler;

fn main() -> resample_lab::Result<()> {
    let params = LgssmParams::new(3, 30, 0.4)?;
    let data = simulate_lgssm(&params, 8)?;
    let model = GuidedLgssm::new(&params, &data.observations)?;
    let cfg = FilterConfig::new(512, "ordered-stratified".parse::<Resampler>()?);

    let pf = particle_filter(&model, &cfg, 1)?;
    let unit = auxiliary_particle_filter(&model, &UnitAuxiliary, &cfg, ApfOptions::default(), 1)?;
    println!("APF with eta = 1 identical to PF: {}", pf == unit);

    let eta = PredictiveAuxiliary::new(&params, &data.observations)?;
    let apf = auxiliary_particle_filter(&model, &eta, &cfg, ApfOptions::default(), 1)?;
    let exact = kalman_loglik(&params, &data.observations)?.log_likelihood;
    println!("Kalman     log L_T = {exact:.4}");
    println!("PF         log L_T = {:.4}, min ESS {:.1}", pf.final_log_likelihood(), min(&pf.ess[1..]));
    println!("APF (pred) log L_T = {:.4}, min ESS {:.1}", apf.final_log_likelihood(), min(&apf.ess[1..]));
    Ok(())
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}
