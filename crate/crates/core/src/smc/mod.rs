//! Particle filtering on Feynman-Kac models, with the linear Gaussian
//! state-space model and its exact Kalman solution as the test bed.

pub mod filter;
pub mod kalman;
pub mod lgssm;
pub mod models;

pub use filter::{auxiliary_particle_filter, particle_filter, ApfOptions, FilterConfig, FilterOutput};
pub use kalman::{kalman_loglik, KalmanOutput};
pub use lgssm::{load_observations_csv, simulate_lgssm, LgssmParams, Trajectory};
pub use models::{
    AuxiliaryFunction, BootstrapLgssm, FeynmanKac, GuidedLgssm, PredictiveAuxiliary, UnitAuxiliary,
};

/// Builds the bootstrap model for `observations`.
pub fn make_bootstrap_fk(
    params: &LgssmParams,
    observations: &[Vec<f64>],
) -> crate::Result<BootstrapLgssm> {
    BootstrapLgssm::new(params, observations)
}

/// Builds the guided model for `observations`.
pub fn make_guided_fk(params: &LgssmParams, observations: &[Vec<f64>]) -> crate::Result<GuidedLgssm> {
    GuidedLgssm::new(params, observations)
}
