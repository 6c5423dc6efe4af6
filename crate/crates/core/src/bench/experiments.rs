//! The four experiment runners. Each returns rows in a fixed order that
//! depends only on the config, never on thread scheduling.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, Formalism, ModelSpec, SystemSpec};
use super::output::ResultRow;
use super::BenchError;
use crate::diagnostics::{
    gaussian_likelihood_system, random_system, variance_rate_fit, variance_with_se,
    CountSamples, CovarianceReport, MomentReport,
};
use crate::error::Result;
use crate::particles::WeightedParticleSystem;
use crate::resampler::Resampler;
use crate::smc::{
    auxiliary_particle_filter, kalman_loglik, load_observations_csv, particle_filter, simulate_lgssm,
    ApfOptions, BootstrapLgssm, FeynmanKac, FilterConfig, FilterOutput, GuidedLgssm, LgssmParams,
    PredictiveAuxiliary,
};
use crate::stream::child_seed;

/// Count covariances are reported only up to this many particles (the
/// estimate costs `O(R N^2)`).
pub const MAX_COVARIANCE_N: usize = 64;

const SYSTEM_SEED: u64 = 0x5359_5354;
const COUNT_SEED: u64 = 0x434f_554e;
const RATE_SEED: u64 = 0x5241_5445;
const RUN_SEED: u64 = 0x5255_4e53;

pub fn run_experiment(kind: ExperimentKind, config: &ExperimentConfig) -> Result<Vec<ResultRow>, BenchError> {
    config.validate(kind)?;
    let label = config.label(kind);
    let numerical = |source| BenchError::Numerical {
        experiment: label.clone(),
        source,
    };
    match kind {
        ExperimentKind::Diagnose => run_diagnose(config, &label).map_err(numerical),
        ExperimentKind::Rate => run_rate(config, &label).map_err(numerical),
        ExperimentKind::PfVariance => run_pf_variance(config, &label).map_err(numerical),
        ExperimentKind::PfOracle => run_pf_oracle(config, &label).map_err(numerical),
    }
}

/// The systems a `diagnose` run iterates over, with their labels.
fn diagnose_systems(config: &ExperimentConfig, label: &str) -> Result<Vec<(String, WeightedParticleSystem)>> {
    let system = config.system.as_ref().expect("validated");
    let sys_seed = child_seed(config.seed, SYSTEM_SEED);
    let mut out = Vec::new();
    match system {
        SystemSpec::Explicit {
            weights,
            states,
            dim,
        } => {
            let states = states
                .clone()
                .unwrap_or_else(|| (0..weights.len()).map(|i| i as f64).collect());
            out.push((label.to_string(), WeightedParticleSystem::new(states, *dim, weights)?));
        }
        SystemSpec::Random { count, dim } => {
            for &n in &config.n_grid {
                for k in 0..*count {
                    let sys = random_system(n, *dim, child_seed(sys_seed, k as u64))?;
                    out.push((format!("{label}/system-{k}"), sys));
                }
            }
        }
        SystemSpec::GaussianLikelihood { dim, obs, count } => {
            for &n in &config.n_grid {
                for k in 0..*count {
                    let sys = gaussian_likelihood_system(n, *dim, *obs, child_seed(sys_seed, k as u64))?;
                    out.push((format!("{label}/system-{k}"), sys));
                }
            }
        }
    }
    Ok(out)
}

/// Unbiasedness, support and count-covariance tables per scheme and system.
///
/// Particle labels in metric names (`bias_3`, `cov_1_3`) are 1-based.
pub fn run_diagnose(config: &ExperimentConfig, label: &str) -> Result<Vec<ResultRow>> {
    let systems = diagnose_systems(config, label)?;
    let seed = config.seed;
    let mut rows = Vec::new();
    for scheme in &config.schemes {
        let name = scheme.to_string();
        for (k, (experiment, system)) in systems.iter().enumerate() {
            let n = system.len();
            let samples = crate::diagnostics::sample_counts(
                scheme,
                system,
                config.replicates,
                child_seed(child_seed(seed, COUNT_SEED), k as u64),
            )?;
            let row = |metric: String, value: f64| ResultRow::aggregate(experiment, &name, metric, value, seed).n(n);
            let moments = MomentReport::from_samples(&samples)?;
            let mut unbiased_violations = 0usize;
            for i in 0..n {
                let (bias, se) = (moments.mean_deviations[i], moments.se_counts[i]);
                if bias.abs() > 4.0 * se + 1e-12 {
                    unbiased_violations += 1;
                }
                rows.push(row(format!("expected_count_{}", i + 1), samples.expected_counts()[i]));
                rows.push(row(format!("mean_count_{}", i + 1), moments.mean_counts[i]).se(se));
                rows.push(row(format!("bias_{}", i + 1), bias).se(se));
                rows.push(row(format!("var_count_{}", i + 1), moments.var_counts[i]));
            }
            rows.push(row("unbiasedness_violations_4se".into(), unbiased_violations as f64));
            rows.push(row("max_abs_deviation".into(), moments.max_abs_deviation));
            rows.push(row("floor_support_violations".into(), moments.floor_support_violations as f64));
            rows.push(row("abs_deviation_gt2_draws".into(), draws_exceeding(&samples, 2.0) as f64));
            if n <= MAX_COVARIANCE_N {
                let cov = CovarianceReport::from_samples(&samples)?;
                for i in 0..n {
                    for j in (i + 1)..n {
                        rows.push(row(format!("cov_{}_{}", i + 1, j + 1), cov.cov(i, j)).se(cov.se(i, j)));
                    }
                }
                rows.push(row("positive_cov_violations_3se".into(), cov.positive_violations(3.0).len() as f64));
            }
        }
    }
    Ok(rows)
}

fn draws_exceeding(samples: &CountSamples, bound: f64) -> usize {
    let expected = samples.expected_counts();
    samples
        .rows()
        .filter(|row| row.iter().zip(expected).any(|(&c, e)| (c as f64 - e).abs() > bound + 1e-9))
        .count()
}

/// One log-log fit of the conditional resampling variance per (scheme, test function).
pub fn run_rate(config: &ExperimentConfig, label: &str) -> Result<Vec<ResultRow>> {
    let seed = config.seed;
    let sys_seed = child_seed(seed, SYSTEM_SEED);
    let system = config.system.clone().expect("validated");
    let family = move |n: usize| match &system {
        SystemSpec::GaussianLikelihood { dim, obs, .. } => gaussian_likelihood_system(n, *dim, *obs, sys_seed),
        SystemSpec::Random { dim, .. } => random_system(n, *dim, sys_seed),
        SystemSpec::Explicit { .. } => unreachable!("rejected by validation"),
    };
    let mut rows = Vec::new();
    for scheme in &config.schemes {
        let name = scheme.to_string();
        for f in &config.test_functions {
            let fit = variance_rate_fit(
                scheme,
                &family,
                |x: &[f64]| f.eval(x),
                &config.n_grid,
                config.replicates,
                child_seed(seed, RATE_SEED),
            )?;
            let fname = f.name();
            for p in &fit.points {
                rows.push(ResultRow::aggregate(label, &name, format!("variance[{fname}]"), p.variance, seed).n(p.n).se(p.se));
            }
            for &n in &fit.excluded {
                rows.push(ResultRow::aggregate(label, &name, format!("variance[{fname}]"), 0.0, seed).n(n));
            }
            rows.push(ResultRow::aggregate(label, &name, format!("slope[{fname}]"), fit.slope, seed).se(fit.slope_se));
            rows.push(ResultRow::aggregate(label, &name, format!("intercept[{fname}]"), fit.intercept, seed));
        }
    }
    Ok(rows)
}

/// The parameters and observations a particle-filter experiment runs on.
pub fn model_data(model: &ModelSpec, seed: u64) -> Result<(LgssmParams, Vec<Vec<f64>>)> {
    let params = model.params()?;
    let observations = match &model.observations {
        Some(path) => {
            let obs = load_observations_csv(path, model.dim)?;
            if obs.len() != model.horizon {
                return Err(crate::Error::InvalidArgument(format!(
                    "{} has {} rows, model horizon is {}",
                    path.display(),
                    obs.len(),
                    model.horizon
                )));
            }
            obs
        }
        None => simulate_lgssm(&params, seed)?.observations,
    };
    Ok((params, observations))
}

/// Runs `replicates` independent filters; run `r` uses seed `child_seed(seed, r)`
/// whatever the scheme and `N`, so schemes are compared on common random numbers.
fn filter_runs(
    config: &ExperimentConfig,
    params: &LgssmParams,
    observations: &[Vec<f64>],
    scheme: &Resampler,
    n: usize,
) -> Result<Vec<FilterOutput>> {
    let model_spec = config.model.as_ref().expect("validated");
    let bootstrap;
    let guided;
    let model: &dyn FeynmanKac = match model_spec.formalism {
        Formalism::Bootstrap => {
            bootstrap = BootstrapLgssm::new(params, observations)?;
            &bootstrap
        }
        Formalism::Guided => {
            guided = GuidedLgssm::new(params, observations)?;
            &guided
        }
    };
    let aux = if model_spec.auxiliary {
        Some(PredictiveAuxiliary::new(params, observations)?)
    } else {
        None
    };
    let fc = FilterConfig::new(n, *scheme).with_test_functions(config.test_functions.clone());
    let run_seed = child_seed(config.seed, RUN_SEED);
    (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let s = child_seed(run_seed, r as u64);
            match &aux {
                Some(a) => auxiliary_particle_filter(model, a, &fc, ApfOptions::default(), s),
                None => particle_filter(model, &fc, s),
            }
        })
        .collect()
}

/// Per-step `Var[log L_t^N]` per scheme, and ratios between every pair of schemes.
pub fn run_pf_variance(config: &ExperimentConfig, label: &str) -> Result<Vec<ResultRow>> {
    let seed = config.seed;
    let model = config.model.as_ref().expect("validated");
    let (params, observations) = model_data(model, seed)?;
    let horizon = params.horizon;
    let mut rows = Vec::new();
    for &n in &config.n_grid {
        // variances[s][t] = (var, se)
        let mut variances: Vec<Vec<(f64, f64)>> = Vec::new();
        for scheme in &config.schemes {
            let name = scheme.to_string();
            let runs = filter_runs(config, &params, &observations, scheme, n)?;
            for (r, out) in runs.iter().enumerate() {
                rows.push(
                    ResultRow::aggregate(label, &name, "log_likelihood", out.final_log_likelihood(), seed)
                        .n(n)
                        .t(horizon)
                        .replicate(r),
                );
            }
            let mut per_t = Vec::with_capacity(horizon + 1);
            for t in 0..=horizon {
                let values: Vec<f64> = runs.iter().map(|o| o.log_likelihood[t]).collect();
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let (var, se) = variance_with_se(&values);
                rows.push(ResultRow::aggregate(label, &name, "mean_log_likelihood", mean, seed).n(n).t(t).se((var / values.len() as f64).sqrt()));
                rows.push(ResultRow::aggregate(label, &name, "var_log_likelihood", var, seed).n(n).t(t).se(se));
                for (k, f) in config.test_functions.iter().enumerate() {
                    let m: Vec<f64> = runs.iter().map(|o| o.means[k][t]).collect();
                    let (v, vse) = variance_with_se(&m);
                    rows.push(ResultRow::aggregate(label, &name, format!("var_filter_mean[{}]", f.name()), v, seed).n(n).t(t).se(vse));
                }
                per_t.push((var, se));
            }
            variances.push(per_t);
        }
        for a in 0..config.schemes.len() {
            for b in (a + 1)..config.schemes.len() {
                let pair = format!("{}/{}", config.schemes[a], config.schemes[b]);
                for (t, (&(va, sa), &(vb, sb))) in variances[a].iter().zip(&variances[b]).enumerate().skip(1) {
                    let ratio = va / vb;
                    // delta method, ignoring the correlation induced by shared seeds
                    let se = ratio.abs() * ((sa / va).powi(2) + (sb / vb).powi(2)).sqrt();
                    rows.push(ResultRow::aggregate(label, &pair, "var_ratio", ratio, seed).n(n).t(t).se(se));
                }
            }
        }
    }
    Ok(rows)
}

/// Agreement of the particle estimate `L_T^N` with the exact Kalman likelihood.
pub fn run_pf_oracle(config: &ExperimentConfig, label: &str) -> Result<Vec<ResultRow>> {
    let seed = config.seed;
    let model = config.model.as_ref().expect("validated");
    let (params, observations) = model_data(model, seed)?;
    let horizon = params.horizon;
    let exact = kalman_loglik(&params, &observations)?.log_likelihood;
    let mut rows = vec![ResultRow::aggregate(label, "kalman", "log_likelihood", exact, seed).t(horizon)];
    for scheme in &config.schemes {
        let name = scheme.to_string();
        for &n in &config.n_grid {
            let runs = filter_runs(config, &params, &observations, scheme, n)?;
            let errors: Vec<f64> = runs.iter().map(|o| o.final_log_likelihood() - exact).collect();
            let ratios: Vec<f64> = errors.iter().map(|e| e.exp()).collect();
            for (r, e) in errors.iter().enumerate() {
                rows.push(ResultRow::aggregate(label, &name, "log_likelihood_error", *e, seed).n(n).t(horizon).replicate(r));
            }
            let r = ratios.len() as f64;
            let mean_ratio = ratios.iter().sum::<f64>() / r;
            let (var_ratio, _) = variance_with_se(&ratios);
            let bias = errors.iter().sum::<f64>() / r;
            let (var_err, _) = variance_with_se(&errors);
            let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / r).sqrt();
            rows.push(ResultRow::aggregate(label, &name, "likelihood_ratio", mean_ratio, seed).n(n).t(horizon).se((var_ratio / r).sqrt()));
            rows.push(ResultRow::aggregate(label, &name, "log_likelihood_bias", bias, seed).n(n).t(horizon).se((var_err / r).sqrt()));
            rows.push(ResultRow::aggregate(label, &name, "log_likelihood_rmse", rmse, seed).n(n).t(horizon));
        }
    }
    Ok(rows)
}
