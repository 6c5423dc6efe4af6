//! Resampling schemes as pure functions of (uniforms, weights).
//!
//! Uniform consumption per call is fixed, so common-random-number
//! comparisons line up:
//!
//! | scheme                 | uniforms drawn                  |
//! |------------------------|---------------------------------|
//! | multinomial            | N                               |
//! | stratified             | N                               |
//! | systematic             | 1                               |
//! | residual (either)      | R = N - sum floor(N W^n)        |
//! | ssp                    | at most N - 1                   |
//! | deterministic alpha    | 0                               |

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::particles::{compensated_sum, ResampleResult, Weights};
use crate::stream::UniformSource;

/// Values within this distance of an integer are treated as integers.
pub const INTEGER_TOL: f64 = 1e-9;

/// Floor that snaps values within [`INTEGER_TOL`] of an integer onto it.
fn snapped_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= INTEGER_TOL {
        r
    } else {
        x.floor()
    }
}

/// The inner draw used for the random part of residual resampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualInner {
    Multinomial,
    Stratified,
}

/// Unordered resampling schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Multinomial,
    Stratified,
    Systematic,
    ResidualMultinomial,
    ResidualStratified,
    Ssp,
    /// Stratified positions with every uniform replaced by `alpha`.
    /// Meant to be applied to an ordered system.
    DeterministicAlpha(f64),
}

impl Scheme {
    pub fn resample<S: UniformSource + ?Sized>(
        &self,
        weights: &Weights,
        source: &mut S,
    ) -> Result<ResampleResult> {
        match *self {
            Scheme::Multinomial => multinomial(weights, source),
            Scheme::Stratified => stratified(weights, source),
            Scheme::Systematic => systematic(weights, source),
            Scheme::ResidualMultinomial => residual(weights, source, ResidualInner::Multinomial),
            Scheme::ResidualStratified => residual(weights, source, ResidualInner::Stratified),
            Scheme::Ssp => ssp_resample(weights, source),
            Scheme::DeterministicAlpha(alpha) => deterministic_alpha(weights, alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scheme::DeterministicAlpha(a) if !(a > 0.0 && a < 1.0) => Err(Error::AlphaOutOfRange(a)),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Multinomial => f.write_str("multinomial"),
            Scheme::Stratified => f.write_str("stratified"),
            Scheme::Systematic => f.write_str("systematic"),
            Scheme::ResidualMultinomial => f.write_str("residual-multinomial"),
            Scheme::ResidualStratified => f.write_str("residual-stratified"),
            Scheme::Ssp => f.write_str("ssp"),
            Scheme::DeterministicAlpha(a) => write!(f, "deterministic-alpha:{a}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let scheme = match s {
            "multinomial" => Scheme::Multinomial,
            "stratified" => Scheme::Stratified,
            "systematic" => Scheme::Systematic,
            "residual-multinomial" => Scheme::ResidualMultinomial,
            "residual-stratified" => Scheme::ResidualStratified,
            "ssp" => Scheme::Ssp,
            other => match other.strip_prefix("deterministic-alpha:") {
                Some(a) => Scheme::DeterministicAlpha(
                    a.parse()
                        .map_err(|_| Error::UnsupportedScheme(other.to_string()))?,
                ),
                None => return Err(Error::UnsupportedScheme(other.to_string())),
            },
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// I.i.d. draws from the weights, one uniform per ancestor, kept in draw order.
pub fn multinomial<S: UniformSource + ?Sized>(
    weights: &Weights,
    source: &mut S,
) -> Result<ResampleResult> {
    let cw = weights.cumulative();
    let ancestors = (0..weights.len())
        .map(|_| cw.inverse(source.next_uniform()))
        .collect();
    ResampleResult::from_ancestors(ancestors, weights)
}

/// One uniform per stratum `(n + U_n) / N`.
pub fn stratified<S: UniformSource + ?Sized>(
    weights: &Weights,
    source: &mut S,
) -> Result<ResampleResult> {
    let n = weights.len();
    let cw = weights.cumulative();
    let inv_n = 1.0 / n as f64;
    let ancestors = cw.inverse_sorted((0..n).map(|i| (i as f64 + source.next_uniform()) * inv_n));
    ResampleResult::from_ancestors(ancestors, weights)
}

/// A single shared uniform: positions `(n + U_1) / N`.
pub fn systematic<S: UniformSource + ?Sized>(
    weights: &Weights,
    source: &mut S,
) -> Result<ResampleResult> {
    let u = source.next_uniform();
    Ok(positions_with_offset(weights, u))
}

/// Positions `(n + alpha) / N` with no randomness.
pub fn deterministic_alpha(weights: &Weights, alpha: f64) -> Result<ResampleResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(positions_with_offset(weights, alpha))
}

fn positions_with_offset(weights: &Weights, offset: f64) -> ResampleResult {
    let n = weights.len();
    let cw = weights.cumulative();
    let inv_n = 1.0 / n as f64;
    let ancestors = cw.inverse_sorted((0..n).map(|i| (i as f64 + offset) * inv_n));
    ResampleResult::from_ancestors(ancestors, weights).expect("indices come from the CDF")
}

/// Residual resampling: `floor(N W^n)` deterministic copies, the remaining
/// `R` offspring drawn by `inner` from the fractional parts.
///
/// When `R = 0` no uniforms are consumed.
pub fn residual<S: UniformSource + ?Sized>(
    weights: &Weights,
    source: &mut S,
    inner: ResidualInner,
) -> Result<ResampleResult> {
    let n = weights.len();
    let scaled = weights.scaled();
    let mut counts = Vec::with_capacity(n);
    let mut remainders = Vec::with_capacity(n);
    for &x in &scaled {
        let fl = snapped_floor(x);
        counts.push(fl as usize);
        remainders.push((x - fl).max(0.0));
    }
    let assigned: usize = counts.iter().sum();
    let r = n.checked_sub(assigned).ok_or(Error::CountMismatch {
        expected: n,
        got: assigned,
    })?;
    if r > 0 {
        let residual_weights = Weights::new(&remainders)?;
        let cw = residual_weights.cumulative();
        match inner {
            ResidualInner::Multinomial => {
                for _ in 0..r {
                    counts[cw.inverse(source.next_uniform())] += 1;
                }
            }
            ResidualInner::Stratified => {
                let inv_r = 1.0 / r as f64;
                let picks =
                    cw.inverse_sorted((0..r).map(|k| (k as f64 + source.next_uniform()) * inv_r));
                for a in picks {
                    counts[a] += 1;
                }
            }
        }
    }
    ResampleResult::from_counts(counts, weights)
}

/// Randomized rounding by Srinivasan's sampling process (pivotal sampling).
///
/// Entries are visited left to right; at each step the two current
/// non-integer entries `n < m` trade mass so that at least one of them
/// becomes an integer, with `delta`/`epsilon` the smallest moves achieving
/// that and the first move taken when `u_k <= epsilon / (delta + epsilon)`.
/// A non-integer survivor is carried forward and paired with the next
/// non-integer entry. Entries that are already integers are never touched.
///
/// Consumes one uniform per pairing, so at most `N - 1` in total.
pub fn ssp_round<S: UniformSource + ?Sized>(xi: &[f64], source: &mut S) -> Result<Vec<usize>> {
    for (index, &x) in xi.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if x < 0.0 {
            return Err(Error::NegativeWeight { index, value: x });
        }
    }
    let total = compensated_sum(xi.iter().copied());
    let target = total.round();
    if (total - target).abs() > INTEGER_TOL {
        return Err(Error::NonIntegerTotal { sum: total });
    }

    let mut floors: Vec<usize> = Vec::with_capacity(xi.len());
    let mut frac: Vec<f64> = Vec::with_capacity(xi.len());
    for &x in xi {
        let fl = snapped_floor(x);
        floors.push(fl as usize);
        let f = x - fl;
        frac.push(if f <= INTEGER_TOL { 0.0 } else { f });
    }

    // Resolves a fractional part to 0 or 1 when it is within tolerance.
    fn settle(floor: &mut usize, f: &mut f64) -> bool {
        if *f <= INTEGER_TOL {
            *f = 0.0;
            true
        } else if *f >= 1.0 - INTEGER_TOL {
            *f = 0.0;
            *floor += 1;
            true
        } else {
            false
        }
    }

    let mut carry: Option<usize> = None;
    for m in 0..xi.len() {
        if frac[m] == 0.0 {
            continue;
        }
        let Some(n) = carry else {
            carry = Some(m);
            continue;
        };
        let (a, b) = (frac[n], frac[m]);
        let delta = (1.0 - a).min(b);
        let epsilon = a.min(1.0 - b);
        let u = source.next_uniform();
        if u <= epsilon / (delta + epsilon) {
            frac[n] = a + delta;
            frac[m] = b - delta;
        } else {
            frac[n] = a - epsilon;
            frac[m] = b + epsilon;
        }
        let n_int = settle(&mut floors[n], &mut frac[n]);
        let m_int = settle(&mut floors[m], &mut frac[m]);
        carry = match (n_int, m_int) {
            (true, true) => None,
            (true, false) => Some(m),
            (false, true) => Some(n),
            // unreachable in exact arithmetic; keep the larger remainder going
            (false, false) => {
                if frac[n] >= frac[m] {
                    floors[m] += usize::from(frac[m] >= 0.5);
                    frac[m] = 0.0;
                    Some(n)
                } else {
                    floors[n] += usize::from(frac[n] >= 0.5);
                    frac[n] = 0.0;
                    Some(m)
                }
            }
        };
    }
    if let Some(n) = carry {
        // only floating-point residue can be left here
        floors[n] += usize::from(frac[n] >= 0.5);
    }
    let got: usize = floors.iter().sum();
    if got as f64 != target {
        return Err(Error::NonIntegerTotal { sum: total });
    }
    Ok(floors)
}

/// SSP resampling: randomized rounding of `(N W^1, ..., N W^N)`.
pub fn ssp_resample<S: UniformSource + ?Sized>(
    weights: &Weights,
    source: &mut S,
) -> Result<ResampleResult> {
    let counts = ssp_round(&weights.scaled(), source)?;
    ResampleResult::from_counts(counts, weights)
}
