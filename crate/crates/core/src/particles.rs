//! Weighted particle systems and the index bookkeeping shared by every scheme.
//!
//! Indices are zero-based throughout: particle `n` of an `N`-particle system
//! is addressed as `0..N`.

use crate::error::{Error, Result};

/// Normalizes nonnegative raw weights so that they sum to one.
pub fn normalize_weights(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::EmptySystem);
    }
    for (index, &w) in raw.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight { index, value: w });
        }
    }
    let total = compensated_sum(raw.iter().copied());
    if total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    Ok(raw.iter().map(|w| w / total).collect())
}

/// Normalizes log-weights with max subtraction before exponentiation.
///
/// Entries equal to `-inf` become zero weights.
pub fn normalize_log_weights(log_w: &[f64]) -> Result<Vec<f64>> {
    if log_w.is_empty() {
        return Err(Error::EmptySystem);
    }
    let mut max = f64::NEG_INFINITY;
    for (index, &lw) in log_w.iter().enumerate() {
        if lw.is_nan() || lw == f64::INFINITY {
            return Err(Error::NonFinite { index });
        }
        max = max.max(lw);
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::AllZeroWeights);
    }
    let shifted: Vec<f64> = log_w.iter().map(|lw| (lw - max).exp()).collect();
    normalize_weights(&shifted)
}

/// `log(sum(exp(log_w)))`, computed stably. Returns `-inf` when every entry is `-inf`.
pub fn log_sum_exp(log_w: &[f64]) -> f64 {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    max + compensated_sum(log_w.iter().map(|lw| (lw - max).exp())).ln()
}

/// Neumaier-compensated summation.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A validated, normalized weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    /// Validates and normalizes raw nonnegative weights.
    pub fn new(raw: &[f64]) -> Result<Self> {
        normalize_weights(raw).map(Weights)
    }

    pub fn from_log(log_w: &[f64]) -> Result<Self> {
        normalize_log_weights(log_w).map(Weights)
    }

    /// Equal weights `1/N`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySystem);
        }
        Ok(Weights(vec![1.0 / n as f64; n]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Weights reordered so that entry `k` is `self[perm[k]]`.
    pub fn permuted(&self, perm: &[usize]) -> Weights {
        Weights(perm.iter().map(|&i| self.0[i]).collect())
    }

    /// `N * W^n` for every index.
    pub fn scaled(&self) -> Vec<f64> {
        let n = self.0.len() as f64;
        self.0.iter().map(|w| n * w).collect()
    }

    pub fn cumulative(&self) -> CumulativeWeights {
        CumulativeWeights::new(self)
    }

    /// Effective sample size `1 / sum(W^2)`.
    pub fn ess(&self) -> f64 {
        1.0 / compensated_sum(self.0.iter().map(|w| w * w))
    }
}

impl std::ops::Index<usize> for Weights {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// The empirical CDF of a weight vector, indexed by particle.
///
/// Built with compensated summation; the last entry is pinned to exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeWeights(Vec<f64>);

impl CumulativeWeights {
    pub fn new(weights: &Weights) -> Self {
        let w = weights.as_slice();
        let mut out = Vec::with_capacity(w.len());
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut prev = 0.0f64;
        for &v in w {
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
            let c = (sum + comp).clamp(prev, 1.0);
            out.push(c);
            prev = c;
        }
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        CumulativeWeights(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Generalized inverse: the smallest `n` with `cumsum[n] >= u`.
    pub fn inverse(&self, u: f64) -> usize {
        let idx = self.0.partition_point(|&c| c < u);
        idx.min(self.0.len() - 1)
    }

    /// Inverts a nondecreasing sequence of positions in a single sweep.
    ///
    /// Produces the same indices as calling [`inverse`](Self::inverse) on
    /// each position, in O(N + len(positions)).
    pub fn inverse_sorted<I>(&self, positions: I) -> Vec<usize>
    where
        I: IntoIterator<Item = f64>,
    {
        let last = self.0.len() - 1;
        let mut j = 0usize;
        positions
            .into_iter()
            .map(|p| {
                while j < last && self.0[j] < p {
                    j += 1;
                }
                j
            })
            .collect()
    }
}

/// Generalized inverse of the weight CDF at `u`.
pub fn inverse_cdf(cw: &CumulativeWeights, u: f64) -> usize {
    cw.inverse(u)
}

/// Expands offspring counts into ancestors listed in ascending contiguous blocks.
pub fn counts_to_ancestors(counts: &[usize]) -> Result<Vec<usize>> {
    let total: usize = counts.iter().sum();
    if total != counts.len() {
        return Err(Error::CountMismatch {
            expected: counts.len(),
            got: total,
        });
    }
    let mut out = Vec::with_capacity(total);
    for (n, &c) in counts.iter().enumerate() {
        out.extend(std::iter::repeat_n(n, c));
    }
    Ok(out)
}

/// Offspring counts `#^n = card{i : ancestors[i] = n}`.
pub fn ancestors_to_counts(ancestors: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; n];
    for &a in ancestors {
        if a >= n {
            return Err(Error::IndexOutOfRange { index: a, n });
        }
        counts[a] += 1;
    }
    Ok(counts)
}

/// Ancestor indices together with offspring counts and deviations `#^n - N W^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampleResult {
    pub ancestors: Vec<usize>,
    pub counts: Vec<usize>,
    pub deviations: Vec<f64>,
}

impl ResampleResult {
    pub fn from_ancestors(ancestors: Vec<usize>, weights: &Weights) -> Result<Self> {
        let counts = ancestors_to_counts(&ancestors, weights.len())?;
        if ancestors.len() != weights.len() {
            return Err(Error::CountMismatch {
                expected: weights.len(),
                got: ancestors.len(),
            });
        }
        Ok(Self::assemble(ancestors, counts, weights))
    }

    pub fn from_counts(counts: Vec<usize>, weights: &Weights) -> Result<Self> {
        let ancestors = counts_to_ancestors(&counts)?;
        Ok(Self::assemble(ancestors, counts, weights))
    }

    fn assemble(ancestors: Vec<usize>, counts: Vec<usize>, weights: &Weights) -> Self {
        let n = weights.len() as f64;
        let deviations = counts
            .iter()
            .zip(weights.as_slice())
            .map(|(&c, &w)| c as f64 - n * w)
            .collect();
        ResampleResult {
            ancestors,
            counts,
            deviations,
        }
    }

    pub fn len(&self) -> usize {
        self.ancestors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ancestors.is_empty()
    }

    pub fn max_abs_deviation(&self) -> f64 {
        self.deviations.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// `N` states in `R^d` stored row-major, with normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedParticleSystem {
    states: Vec<f64>,
    dim: usize,
    weights: Weights,
}

impl WeightedParticleSystem {
    /// Builds a system from row-major states and raw (unnormalized) weights.
    pub fn new(states: Vec<f64>, dim: usize, raw_weights: &[f64]) -> Result<Self> {
        let weights = Weights::new(raw_weights)?;
        Self::from_weights(states, dim, weights)
    }

    pub fn from_weights(states: Vec<f64>, dim: usize, weights: Weights) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if states.len() != weights.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: weights.len() * dim,
                got: states.len(),
            });
        }
        if let Some(index) = states.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index: index / dim });
        }
        Ok(WeightedParticleSystem {
            states,
            dim,
            weights,
        })
    }

    /// A one-dimensional system.
    pub fn univariate(states: Vec<f64>, raw_weights: &[f64]) -> Result<Self> {
        Self::new(states, 1, raw_weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn into_states(self) -> Vec<f64> {
        self.states
    }

    /// The system with particle `k` of the result equal to particle `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut states = Vec::with_capacity(self.states.len());
        for &i in perm {
            states.extend_from_slice(self.state(i));
        }
        WeightedParticleSystem {
            states,
            dim: self.dim,
            weights: self.weights.permuted(perm),
        }
    }

    /// `sum_n W^n phi(X^n)`.
    pub fn expectation<F: Fn(&[f64]) -> f64>(&self, phi: F) -> f64 {
        compensated_sum((0..self.len()).map(|n| self.weights[n] * phi(self.state(n))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_weights(&[1.0]).unwrap(), vec![1.0]);
        assert_eq!(normalize_weights(&[2.0, 2.0]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(normalize_weights(&[1.0, 3.0]).unwrap(), vec![0.25, 0.75]);
    }

    #[test]
    fn normalize_errors() {
        assert_eq!(normalize_weights(&[0.0, 0.0]), Err(Error::AllZeroWeights));
        assert!(matches!(
            normalize_weights(&[1.0, -0.5]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert_eq!(
            normalize_weights(&[1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
        assert_eq!(
            normalize_weights(&[f64::INFINITY]),
            Err(Error::NonFinite { index: 0 })
        );
        assert_eq!(normalize_weights(&[]), Err(Error::EmptySystem));
    }

    #[test]
    fn log_weights_handle_underflow() {
        let w = normalize_log_weights(&[-1000.0, -1000.0 + 2f64.ln(), f64::NEG_INFINITY]).unwrap();
        // -1000 + ln 2 is itself rounded at the 1e-13 level
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((w[1] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(w[2], 0.0);
        assert_eq!(
            normalize_log_weights(&[f64::NEG_INFINITY]),
            Err(Error::AllZeroWeights)
        );
    }

    #[test]
    fn inverse_cdf_examples() {
        let cw = Weights::new(&[1.0]).unwrap().cumulative();
        assert_eq!(inverse_cdf(&cw, 0.7), 0);
        let cw = Weights::new(&[0.2, 0.3, 0.5]).unwrap().cumulative();
        assert_eq!(inverse_cdf(&cw, 0.5), 1);
        assert_eq!(inverse_cdf(&cw, 0.51), 2);
        assert_eq!(inverse_cdf(&cw, 1.0), 2);
        assert_eq!(inverse_cdf(&cw, 0.0), 0);
    }

    #[test]
    fn cumulative_last_entry_is_one() {
        let w = Weights::new(&vec![0.1; 1000]).unwrap();
        let cw = w.cumulative();
        assert_eq!(*cw.as_slice().last().unwrap(), 1.0);
        assert!(cw.as_slice().windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn zero_weight_particles_skipped() {
        let cw = Weights::new(&[0.5, 0.0, 0.5]).unwrap().cumulative();
        assert_eq!(cw.inverse(0.5), 0);
        assert_eq!(cw.inverse(0.5000001), 2);
    }

    #[test]
    fn counts_ancestors_examples() {
        assert_eq!(counts_to_ancestors(&[2, 0, 1]).unwrap(), vec![0, 0, 2]);
        assert_eq!(counts_to_ancestors(&[0, 3, 0]).unwrap(), vec![1, 1, 1]);
        assert_eq!(counts_to_ancestors(&[1, 1, 1, 1]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(
            counts_to_ancestors(&[2, 2]),
            Err(Error::CountMismatch {
                expected: 2,
                got: 4
            })
        );
        assert_eq!(ancestors_to_counts(&[0, 0, 2], 3).unwrap(), vec![2, 0, 1]);
        assert_eq!(ancestors_to_counts(&[1, 1, 1], 3).unwrap(), vec![0, 3, 0]);
        assert_eq!(
            ancestors_to_counts(&[0, 1, 2, 3], 4).unwrap(),
            vec![1, 1, 1, 1]
        );
        assert_eq!(
            ancestors_to_counts(&[0, 5], 2),
            Err(Error::IndexOutOfRange { index: 5, n: 2 })
        );
    }

    #[test]
    fn system_validation() {
        assert!(matches!(
            WeightedParticleSystem::new(vec![0.0; 5], 2, &[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let sys = WeightedParticleSystem::new(vec![1.0, 2.0, 3.0, 4.0], 2, &[1.0, 3.0]).unwrap();
        assert_eq!(sys.state(1), &[3.0, 4.0]);
        let p = sys.permuted(&[1, 0]);
        assert_eq!(p.state(0), &[3.0, 4.0]);
        assert_eq!(p.weights().as_slice(), &[0.75, 0.25]);
    }
}
