//! Empirical checks on resampling schemes: offspring moments, pairwise count
//! covariances, discrepancy metrics and variance-rate fits.
//!
//! Replicate `r` of every Monte Carlo loop draws from the substream
//! `(seed, [.., r])`, and each replicate writes its own output slot, so the
//! results do not depend on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::particles::{compensated_sum, WeightedParticleSystem};
use crate::resampler::Resampler;
use crate::stream::UniformStream;

/// Exact star discrepancy of a point set in `[0, 1]`.
pub fn star_discrepancy_1d(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySystem);
    }
    for &p in points {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfUnitInterval { value: p });
        }
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let i = i as f64;
            ((i + 1.0) / n - u).max(u - i / n)
        })
        .fold(0.0, f64::max))
}

/// Lower-bound estimate of the star discrepancy of points in `[0,1]^d`.
///
/// Takes the largest local discrepancy over anchored boxes whose upper
/// corners are the sample points themselves or nodes of a uniform grid with
/// `grid` cells per axis. Exact only in special cases; for `d = 1` use
/// [`star_discrepancy_1d`].
pub fn star_discrepancy_lower_bound(points: &[f64], dim: usize, grid: usize) -> Result<f64> {
    if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim.max(1),
            got: points.len(),
        });
    }
    for &p in points {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfUnitInterval { value: p });
        }
    }
    let n = points.len() / dim;
    let local = |corner: &[f64]| -> f64 {
        let mut open = 0usize;
        let mut closed = 0usize;
        for p in points.chunks_exact(dim) {
            if p.iter().zip(corner).all(|(a, b)| a <= b) {
                closed += 1;
                if p.iter().zip(corner).all(|(a, b)| a < b) {
                    open += 1;
                }
            }
        }
        let vol: f64 = corner.iter().product();
        (vol - open as f64 / n as f64)
            .max(closed as f64 / n as f64 - vol)
    };
    let mut best = 0.0f64;
    for p in points.chunks_exact(dim) {
        best = best.max(local(p));
    }
    if grid > 0 {
        let total = (grid + 1).pow(dim as u32);
        let mut corner = vec![0.0; dim];
        for idx in 0..total {
            let mut k = idx;
            for c in corner.iter_mut() {
                *c = (k % (grid + 1)) as f64 / grid as f64;
                k /= grid + 1;
            }
            best = best.max(local(&corner));
        }
    }
    Ok(best)
}

/// Kolmogorov (star) distance between two finite weighted atomic measures on `R`.
///
/// Atoms are `(location, mass)` pairs; both measures should have unit mass.
pub fn kolmogorov_weighted(p: &[(f64, f64)], q: &[(f64, f64)]) -> f64 {
    let mut events: Vec<(f64, f64)> = p
        .iter()
        .map(|&(x, w)| (x, w))
        .chain(q.iter().map(|&(x, w)| (x, -w)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut diff = 0.0f64;
    let mut comp = 0.0f64;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        while i < events.len() && events[i].0 == x {
            let v = events[i].1;
            let t = diff + v;
            if diff.abs() >= v.abs() {
                comp += (diff - t) + v;
            } else {
                comp += (v - t) + diff;
            }
            diff = t;
            i += 1;
        }
        best = best.max((diff + comp).abs());
    }
    best
}

/// Offspring counts from `R` independent replicates on a fixed system.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSamples {
    n: usize,
    replicates: usize,
    data: Vec<u32>,
    scaled_weights: Vec<f64>,
}

impl CountSamples {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    /// Counts of replicate `r`.
    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.data.chunks_exact(self.n)
    }

    /// `N W^n` of the resampled system.
    pub fn expected_counts(&self) -> &[f64] {
        &self.scaled_weights
    }

    /// Fraction of replicates satisfying `pred`, with its standard error.
    pub fn probability<F: Fn(&[u32]) -> bool>(&self, pred: F) -> (f64, f64) {
        let hits = self.rows().filter(|r| pred(r)).count() as f64;
        let r = self.replicates as f64;
        let p = hits / r;
        (p, (p * (1.0 - p) / r).sqrt())
    }
}

/// Draws `replicates` offspring-count vectors, replicate `r` on substream `(seed, [r])`.
pub fn sample_counts(
    resampler: &Resampler,
    system: &WeightedParticleSystem,
    replicates: usize,
    seed: u64,
) -> Result<CountSamples> {
    let n = system.len();
    let prepared = resampler.prepare(system)?;
    let mut data = vec![0u32; n * replicates];
    data.par_chunks_mut(n)
        .enumerate()
        .try_for_each(|(r, slot)| -> Result<()> {
            let mut stream = UniformStream::derive(seed, &[r as u64]);
            for a in prepared.ancestors(&mut stream)? {
                slot[a] += 1;
            }
            Ok(())
        })?;
    Ok(CountSamples {
        n,
        replicates,
        data,
        scaled_weights: system.weights().scaled(),
    })
}

/// Per-index moments of offspring counts and deviations over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub replicates: usize,
    pub mean_counts: Vec<f64>,
    pub var_counts: Vec<f64>,
    /// Standard error of each mean count, `sd / sqrt(R)`.
    pub se_counts: Vec<f64>,
    pub mean_deviations: Vec<f64>,
    /// Sample mean of `(Delta^n)^2`.
    pub mean_sq_deviations: Vec<f64>,
    pub max_abs_deviation: f64,
    /// Draws where some count left `{floor(N W^n), floor(N W^n) + 1}`.
    pub floor_support_violations: usize,
}

impl MomentReport {
    pub fn from_samples(samples: &CountSamples) -> Result<Self> {
        let (n, r) = (samples.n, samples.replicates);
        if r < 2 {
            return Err(Error::InvalidArgument("at least two replicates are needed".into()));
        }
        let expected = &samples.scaled_weights;
        let mut sum = vec![0u64; n];
        let mut sum_sq = vec![0u64; n];
        let mut max_abs = 0.0f64;
        let mut violations = 0usize;
        let mut sq_dev = vec![0.0f64; n];
        let floors: Vec<f64> = expected.iter().map(|x| snapped_floor(*x)).collect();
        for row in samples.rows() {
            let mut bad = false;
            for i in 0..n {
                let c = row[i] as u64;
                sum[i] += c;
                sum_sq[i] += c * c;
                let dev = c as f64 - expected[i];
                sq_dev[i] += dev * dev;
                max_abs = max_abs.max(dev.abs());
                let c = c as f64;
                if c != floors[i] && c != floors[i] + 1.0 {
                    bad = true;
                }
            }
            violations += usize::from(bad);
        }
        let rf = r as f64;
        let mean_counts: Vec<f64> = sum.iter().map(|&s| s as f64 / rf).collect();
        let var_counts: Vec<f64> = (0..n)
            .map(|i| {
                let s = sum[i] as f64;
                ((sum_sq[i] as f64 - s * s / rf) / (rf - 1.0)).max(0.0)
            })
            .collect();
        Ok(MomentReport {
            replicates: r,
            se_counts: var_counts.iter().map(|v| (v / rf).sqrt()).collect(),
            mean_deviations: mean_counts.iter().zip(expected).map(|(m, e)| m - e).collect(),
            mean_sq_deviations: sq_dev.iter().map(|s| s / rf).collect(),
            mean_counts,
            var_counts,
            max_abs_deviation: max_abs,
            floor_support_violations: violations,
        })
    }
}

fn snapped_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= crate::resample::INTEGER_TOL {
        r
    } else {
        x.floor()
    }
}

/// Offspring moments of `resampler` on `system` over `replicates` draws.
pub fn offspring_moments(
    resampler: &Resampler,
    system: &WeightedParticleSystem,
    replicates: usize,
    seed: u64,
) -> Result<MomentReport> {
    MomentReport::from_samples(&sample_counts(resampler, system, replicates, seed)?)
}

/// Sample covariance matrix of offspring counts with elementwise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub n: usize,
    pub replicates: usize,
    cov: Vec<f64>,
    se: Vec<f64>,
}

impl CovarianceReport {
    pub fn from_samples(samples: &CountSamples) -> Result<Self> {
        let (n, r) = (samples.n, samples.replicates);
        if r < 2 {
            return Err(Error::InvalidArgument("at least two replicates are needed".into()));
        }
        let rf = r as f64;
        let mut mean = vec![0.0f64; n];
        for row in samples.rows() {
            for i in 0..n {
                mean[i] += row[i] as f64;
            }
        }
        for m in mean.iter_mut() {
            *m /= rf;
        }
        let mut s1 = vec![0.0f64; n * n];
        let mut s2 = vec![0.0f64; n * n];
        let mut centered = vec![0.0f64; n];
        for row in samples.rows() {
            for i in 0..n {
                centered[i] = row[i] as f64 - mean[i];
            }
            for i in 0..n {
                for j in i..n {
                    let z = centered[i] * centered[j];
                    s1[i * n + j] += z;
                    s2[i * n + j] += z * z;
                }
            }
        }
        let mut cov = vec![0.0f64; n * n];
        let mut se = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let m1 = s1[i * n + j] / rf;
                let var_z = (s2[i * n + j] / rf - m1 * m1).max(0.0) * rf / (rf - 1.0);
                let c = s1[i * n + j] / (rf - 1.0);
                let e = (var_z / rf).sqrt();
                cov[i * n + j] = c;
                cov[j * n + i] = c;
                se[i * n + j] = e;
                se[j * n + i] = e;
            }
        }
        Ok(CovarianceReport {
            n,
            replicates: r,
            cov,
            se,
        })
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.n + j]
    }

    pub fn se(&self, i: usize, j: usize) -> f64 {
        self.se[i * self.n + j]
    }

    /// Off-diagonal pairs whose estimate exceeds `k` standard errors above zero.
    pub fn positive_violations(&self, k: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.cov(i, j) > k * self.se(i, j) + 1e-12 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.cov(i, j)).sum()
    }
}

/// Pairwise covariances of offspring counts over `replicates` draws.
pub fn pairwise_count_cov(
    resampler: &Resampler,
    system: &WeightedParticleSystem,
    replicates: usize,
    seed: u64,
) -> Result<CovarianceReport> {
    CovarianceReport::from_samples(&sample_counts(resampler, system, replicates, seed)?)
}

/// Least-squares line through `(x, y)` with the slope's standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Ordinary least squares of `log(variances)` against `log(ns)`.
pub fn fit_loglog(ns: &[f64], variances: &[f64]) -> Result<LineFit> {
    if ns.len() != variances.len() || ns.len() < 2 {
        return Err(Error::InvalidArgument("need at least two matching points".into()));
    }
    let x: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if x.len() > 2 {
        let rss: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| {
                let e = b - intercept - slope * a;
                e * e
            })
            .sum();
        (rss / (k - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_se,
    })
}

/// Conditional variance of `rho(zeta^N)(phi)` at one `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub n: usize,
    pub variance: f64,
    /// Standard error of the variance estimate.
    pub se: f64,
}

/// Log-log fit of conditional resampling variance against `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub points: Vec<RatePoint>,
    /// Grid values whose variance estimate was exactly zero (left out of the fit).
    pub excluded: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Sample variance and the standard error of that variance (fourth-moment formula).
pub fn variance_with_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    if values.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(values.iter().copied()) / r;
    let m2 = compensated_sum(values.iter().map(|v| (v - mean).powi(2))) / r;
    let m4 = compensated_sum(values.iter().map(|v| (v - mean).powi(4))) / r;
    let var = m2 * r / (r - 1.0);
    let se = ((m4 - m2 * m2).max(0.0) / r).sqrt();
    (var, se)
}

/// Variance of `(1/N) sum phi(X^{A^n})` over `replicates` draws on `system`.
pub fn resampling_variance<F>(
    resampler: &Resampler,
    system: &WeightedParticleSystem,
    phi: F,
    replicates: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    let n = system.len();
    let phi_vals: Vec<f64> = (0..n).map(|i| phi(system.state(i))).collect();
    let prepared = resampler.prepare(system)?;
    let values = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let mut stream = UniformStream::derive(seed, &[n as u64, r as u64]);
            let anc = prepared.ancestors(&mut stream)?;
            Ok(compensated_sum(anc.iter().map(|&a| phi_vals[a])) / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(variance_with_se(&values))
}

/// Fits the decay rate of the conditional resampling variance along a family of systems.
///
/// `family(N)` produces the particle system at size `N`; the variance at
/// each `N` is over the resampling randomness only.
pub fn variance_rate_fit<Fam, F>(
    resampler: &Resampler,
    family: Fam,
    phi: F,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<RateFit>
where
    Fam: Fn(usize) -> Result<WeightedParticleSystem>,
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n_grid.len() < 4 {
        return Err(Error::InvalidArgument("rate fits need at least four grid points".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    if replicates < 2 {
        return Err(Error::InvalidArgument("at least two replicates are needed".into()));
    }
    let mut points = Vec::with_capacity(n_grid.len());
    let mut excluded = Vec::new();
    for &n in n_grid {
        let system = family(n)?;
        let (variance, se) = resampling_variance(resampler, &system, &phi, replicates, seed)?;
        if variance == 0.0 {
            excluded.push(n);
        } else {
            points.push(RatePoint { n, variance, se });
        }
    }
    if points.len() < 2 {
        return Err(Error::DegenerateVariance {
            n: excluded.first().copied().unwrap_or(0),
        });
    }
    let ns: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let vs: Vec<f64> = points.iter().map(|p| p.variance).collect();
    let fit = fit_loglog(&ns, &vs)?;
    Ok(RateFit {
        points,
        excluded,
        slope: fit.slope,
        intercept: fit.intercept,
        slope_se: fit.slope_se,
    })
}

/// A system of `n` i.i.d. `N(0, I_d)` states weighted by a Gaussian
/// likelihood `exp(-||y - x||^2 / 2)` centred at `y = (obs, ..., obs)`.
///
/// States come from substream `(seed, [n])`, so the family is reproducible
/// per size.
pub fn gaussian_likelihood_system(
    n: usize,
    dim: usize,
    obs: f64,
    seed: u64,
) -> Result<WeightedParticleSystem> {
    let mut stream = UniformStream::derive(seed, &[0x6761_7573, n as u64]);
    let states: Vec<f64> = (0..n * dim).map(|_| stream.next_normal()).collect();
    let log_w: Vec<f64> = states
        .chunks_exact(dim)
        .map(|x| -0.5 * x.iter().map(|v| (obs - v).powi(2)).sum::<f64>())
        .collect();
    WeightedParticleSystem::from_weights(states, dim, crate::particles::Weights::from_log(&log_w)?)
}

/// `n` random states in `R^dim` with weights drawn i.i.d. uniform on (0, 1).
pub fn random_system(n: usize, dim: usize, seed: u64) -> Result<WeightedParticleSystem> {
    let mut stream = UniformStream::derive(seed, &[0x7261_6e64, n as u64, dim as u64]);
    let states: Vec<f64> = (0..n * dim).map(|_| stream.next_normal()).collect();
    let raw: Vec<f64> = (0..n).map(|_| stream.next_uniform()).collect();
    WeightedParticleSystem::new(states, dim, &raw)
}
