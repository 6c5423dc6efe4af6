//! The standard particle filter and the auxiliary particle filter.
//!
//! Resampling happens at every step `t = 1..=T`. Per run, the uniforms for
//! resampling at step `t` come from substream `(seed, [resample, t])` and
//! the proposal noise from `(seed, [move, t])`, so runs that share a seed
//! share their random numbers regardless of the resampling scheme.

use super::models::{AuxiliaryFunction, FeynmanKac};
use crate::error::{Error, Result};
use crate::particles::{log_sum_exp, WeightedParticleSystem, Weights};
use crate::resampler::Resampler;
use crate::stream::UniformStream;
use crate::testfn::TestFn;

const INIT_TAG: u64 = 0x696e_6974;
const RESAMPLE_TAG: u64 = 0x7265_7361;
const MOVE_TAG: u64 = 0x6d6f_7665;

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub n_particles: usize,
    pub resampler: Resampler,
    /// Functions whose filtering expectations are recorded at every step.
    pub test_functions: Vec<TestFn>,
}

impl FilterConfig {
    pub fn new(n_particles: usize, resampler: Resampler) -> Self {
        FilterConfig {
            n_particles,
            resampler,
            test_functions: Vec::new(),
        }
    }

    pub fn with_test_functions(mut self, fs: Vec<TestFn>) -> Self {
        self.test_functions = fs;
        self
    }
}

/// Options specific to the auxiliary particle filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApfOptions {
    /// Whether the last resampling step (at `t = T`, using `eta_{T-1}`) is
    /// twisted. When false, that step resamples with the plain weights.
    pub twist_final_step: bool,
}

impl Default for ApfOptions {
    fn default() -> Self {
        ApfOptions {
            twist_final_step: true,
        }
    }
}

/// Everything a filter run reports, indexed by `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    /// `log l_t^N`.
    pub log_increments: Vec<f64>,
    /// `log L_t^N = sum_{s <= t} log l_s^N`.
    pub log_likelihood: Vec<f64>,
    /// `means[k][t] = sum_n W_t^n phi_k(X_t^n)`.
    pub means: Vec<Vec<f64>>,
    pub ess: Vec<f64>,
    /// Variance of the normalized weights `W_t^n` around `1/N`, per step.
    pub weight_variance: Vec<f64>,
}

impl FilterOutput {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihood.last().expect("at least time 0")
    }
}

/// Standard particle filter.
pub fn particle_filter<M: FeynmanKac + ?Sized>(
    model: &M,
    config: &FilterConfig,
    seed: u64,
) -> Result<FilterOutput> {
    run(model, config, None, seed)
}

/// Auxiliary particle filter: resampling weights `W~ ∝ W eta_{t-1}(X_{t-1})`,
/// importance weights `w_t = G_t W / W~` evaluated at the ancestor.
pub fn auxiliary_particle_filter<M: FeynmanKac + ?Sized, A: AuxiliaryFunction>(
    model: &M,
    auxiliary: &A,
    config: &FilterConfig,
    options: ApfOptions,
    seed: u64,
) -> Result<FilterOutput> {
    run(model, config, Some((auxiliary as &dyn AuxiliaryFunction, options)), seed)
}

fn record(
    out: &mut FilterOutput,
    config: &FilterConfig,
    states: &[f64],
    dim: usize,
    log_w: &[f64],
    step: usize,
) -> Result<Weights> {
    let n = log_w.len();
    let lse = log_sum_exp(log_w);
    if lse == f64::NEG_INFINITY {
        return Err(Error::WeightsVanished { step });
    }
    if !lse.is_finite() {
        return Err(Error::NonFinite { index: step });
    }
    let inc = lse - (n as f64).ln();
    let prev = out.log_likelihood.last().copied().unwrap_or(0.0);
    out.log_increments.push(inc);
    out.log_likelihood.push(prev + inc);
    let weights = Weights::from_log(log_w).map_err(|e| match e {
        Error::AllZeroWeights => Error::WeightsVanished { step },
        other => other,
    })?;
    for (k, f) in config.test_functions.iter().enumerate() {
        let m = states
            .chunks_exact(dim)
            .zip(weights.as_slice())
            .map(|(x, w)| w * f.eval(x))
            .sum();
        out.means[k].push(m);
    }
    out.ess.push(weights.ess());
    let inv_n = 1.0 / n as f64;
    out.weight_variance.push(
        weights
            .as_slice()
            .iter()
            .map(|w| (w - inv_n) * (w - inv_n))
            .sum::<f64>()
            / n as f64,
    );
    Ok(weights)
}

fn run<M: FeynmanKac + ?Sized>(
    model: &M,
    config: &FilterConfig,
    auxiliary: Option<(&dyn AuxiliaryFunction, ApfOptions)>,
    seed: u64,
) -> Result<FilterOutput> {
    let n = config.n_particles;
    if n == 0 {
        return Err(Error::EmptySystem);
    }
    let d = model.dim();
    let horizon = model.horizon();
    let mut out = FilterOutput {
        log_increments: Vec::with_capacity(horizon + 1),
        log_likelihood: Vec::with_capacity(horizon + 1),
        means: vec![Vec::with_capacity(horizon + 1); config.test_functions.len()],
        ess: Vec::with_capacity(horizon + 1),
        weight_variance: Vec::with_capacity(horizon + 1),
    };

    let mut states = vec![0.0; n * d];
    let mut stream = UniformStream::derive(seed, &[INIT_TAG]);
    for x in states.chunks_exact_mut(d) {
        model.sample_initial(&mut stream, x);
    }
    let mut log_w: Vec<f64> = states
        .chunks_exact(d)
        .map(|x| model.log_potential_initial(x))
        .collect();
    let mut weights = record(&mut out, config, &states, d, &log_w, 0)?;

    let mut next = vec![0.0; n * d];
    for t in 1..=horizon {
        // resampling weights and the per-ancestor log correction log(W / W~)
        let twist = auxiliary.filter(|(_, opts)| t < horizon || opts.twist_final_step);
        let (resample_weights, correction) = match twist {
            None => (weights, None),
            Some((aux, _)) => {
                let mut twisted = Vec::with_capacity(n);
                for (i, x) in states.chunks_exact(d).enumerate() {
                    let le = aux.log_eta(t - 1, x);
                    if le.is_nan() || le == f64::INFINITY {
                        return Err(Error::NonFinite { index: i });
                    }
                    if le == f64::NEG_INFINITY && weights[i] > 0.0 {
                        return Err(Error::ZeroAuxiliaryWeight { index: i });
                    }
                    twisted.push(log_w[i] + le);
                }
                let lse_plain = log_sum_exp(&log_w);
                let lse_twisted = log_sum_exp(&twisted);
                let corr: Vec<f64> = log_w
                    .iter()
                    .zip(&twisted)
                    .map(|(a, b)| (a - lse_plain) - (b - lse_twisted))
                    .collect();
                (Weights::from_log(&twisted)?, Some(corr))
            }
        };

        let system = WeightedParticleSystem::from_weights(states, d, resample_weights)?;
        let mut rs = UniformStream::derive(seed, &[RESAMPLE_TAG, t as u64]);
        let ancestors = config.resampler.resample(&system, &mut rs)?.ancestors;
        states = system.into_states();

        let mut ms = UniformStream::derive(seed, &[MOVE_TAG, t as u64]);
        for (i, &a) in ancestors.iter().enumerate() {
            let prev = &states[a * d..(a + 1) * d];
            let x = &mut next[i * d..(i + 1) * d];
            model.sample_transition(t, prev, &mut ms, x);
            let mut lw = model.log_potential(t, prev, x);
            if let Some(c) = &correction {
                lw += c[a];
            }
            log_w[i] = lw;
        }
        std::mem::swap(&mut states, &mut next);
        weights = record(&mut out, config, &states, d, &log_w, t)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resample::Scheme;
    use crate::smc::lgssm::{simulate_lgssm, LgssmParams};
    use crate::smc::models::BootstrapLgssm;

    #[test]
    fn single_particle_accumulates_potentials() {
        let p = LgssmParams::new(1, 6, 0.5).unwrap();
        let data = simulate_lgssm(&p, 3).unwrap();
        let model = BootstrapLgssm::new(&p, &data.observations).unwrap();
        let cfg = FilterConfig::new(1, Scheme::Multinomial.into());
        let out = particle_filter(&model, &cfg, 9).unwrap();
        // replay the single trajectory by hand
        let mut s0 = UniformStream::derive(9, &[INIT_TAG]);
        let mut x = vec![0.0];
        model.sample_initial(&mut s0, &mut x);
        let mut total = 0.0;
        for t in 1..=6 {
            let mut ms = UniformStream::derive(9, &[MOVE_TAG, t as u64]);
            let mut nx = vec![0.0];
            model.sample_transition(t, &x, &mut ms, &mut nx);
            total += model.log_potential(t, &x, &nx);
            x = nx;
        }
        assert!((out.final_log_likelihood() - total).abs() < 1e-12);
        assert!(out.ess.iter().all(|&e| e == 1.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let p = LgssmParams::new(2, 10, 0.4).unwrap();
        let data = simulate_lgssm(&p, 1).unwrap();
        let model = BootstrapLgssm::new(&p, &data.observations).unwrap();
        let cfg = FilterConfig::new(64, "ordered-stratified".parse().unwrap())
            .with_test_functions(vec![TestFn::Identity]);
        let a = particle_filter(&model, &cfg, 5).unwrap();
        let b = particle_filter(&model, &cfg, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.log_likelihood.len(), 11);
        assert_eq!(a.means[0].len(), 11);
        for (t, w) in a.log_likelihood.windows(2).enumerate() {
            assert!((w[1] - w[0] - a.log_increments[t + 1]).abs() < 1e-12);
        }
        assert!(a.ess.iter().all(|&e| (1.0 - 1e-9..=64.0 + 1e-9).contains(&e)));
    }

    #[test]
    fn zero_particles_rejected() {
        let p = LgssmParams::new(1, 2, 0.4).unwrap();
        let data = simulate_lgssm(&p, 1).unwrap();
        let model = BootstrapLgssm::new(&p, &data.observations).unwrap();
        let cfg = FilterConfig::new(0, Scheme::Multinomial.into());
        assert_eq!(particle_filter(&model, &cfg, 0), Err(Error::EmptySystem));
    }
}
