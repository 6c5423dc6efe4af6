//! Hilbert curve ordering of multivariate particles.
//!
//! The codec works on the dyadic grid with `m` levels per axis and packs a
//! key into 62 bits or fewer. Encoding and decoding follow Skilling's
//! transpose construction (reflected Gray code), which puts key 0 on the
//! cell at the origin. For `d = 2, m = 1` the traversal is
//! `(0,0) -> (0,1/2) -> (1/2,1/2) -> (1/2,0)`. For `d = 1` the curve is the
//! identity.
//!
//! States in `R^d` are first pushed into `(0,1)^d` by a per-axis increasing
//! bijection ([`CubifyingMap`]), then ordered by their Hilbert key.

use crate::error::{Error, Result};
use crate::particles::{ResampleResult, WeightedParticleSystem};
use crate::resample;
use crate::stream::UniformSource;

/// Largest double strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Fixed-precision Hilbert encoder/decoder for `dim` axes and `levels` bits per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertCodec {
    dim: usize,
    levels: u32,
}

impl HilbertCodec {
    pub fn new(dim: usize, levels: u32) -> Result<Self> {
        if dim == 0 || levels == 0 || dim as u64 * levels as u64 > 62 {
            return Err(Error::InvalidPrecision { dim, levels });
        }
        Ok(HilbertCodec { dim, levels })
    }

    /// The finest precision that fits a 62-bit key: `m = floor(62 / d)`.
    pub fn for_dim(dim: usize) -> Result<Self> {
        if dim == 0 || dim > 62 {
            return Err(Error::InvalidPrecision { dim, levels: 0 });
        }
        Self::new(dim, (62 / dim) as u32)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn key_bits(&self) -> u32 {
        self.dim as u32 * self.levels
    }

    /// Number of keys, `2^(m d)`.
    pub fn key_count(&self) -> u64 {
        1u64 << self.key_bits()
    }

    /// Side length of a grid cell, `2^-m`.
    pub fn cell_side(&self) -> f64 {
        (-(self.levels as f64)).exp2()
    }

    /// Key of the grid cell with integer coordinates `cell` (each below `2^m`).
    pub fn encode_cell(&self, cell: &[u64]) -> Result<u64> {
        if cell.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: cell.len(),
            });
        }
        let side = 1u64 << self.levels;
        for (axis, &c) in cell.iter().enumerate() {
            if c >= side {
                return Err(Error::CoordinateOutOfRange {
                    axis,
                    value: c as f64,
                });
            }
        }
        if self.dim == 1 {
            return Ok(cell[0]);
        }
        let mut x = cell.to_vec();
        axes_to_transpose(&mut x, self.levels);
        Ok(interleave(&x, self.levels))
    }

    /// Integer coordinates of the cell holding key `key`.
    pub fn decode_cell(&self, key: u64) -> Result<Vec<u64>> {
        if key >= self.key_count() {
            return Err(Error::KeyOutOfRange {
                key,
                bits: self.key_bits(),
            });
        }
        if self.dim == 1 {
            return Ok(vec![key]);
        }
        let mut x = deinterleave(key, self.dim, self.levels);
        transpose_to_axes(&mut x, self.levels);
        Ok(x)
    }

    /// Key of the half-open cell containing `point` in `[0,1)^d`.
    pub fn encode(&self, point: &[f64]) -> Result<u64> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        let scale = (self.levels as f64).exp2();
        let mut cell = Vec::with_capacity(self.dim);
        for (axis, &v) in point.iter().enumerate() {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::CoordinateOutOfRange { axis, value: v });
            }
            cell.push((v * scale) as u64);
        }
        self.encode_cell(&cell)
    }

    /// Lower corner of the cell holding `key`.
    pub fn decode(&self, key: u64) -> Result<Vec<f64>> {
        let side = self.cell_side();
        Ok(self
            .decode_cell(key)?
            .into_iter()
            .map(|c| c as f64 * side)
            .collect())
    }
}

fn interleave(x: &[u64], bits: u32) -> u64 {
    let mut key = 0u64;
    for b in (0..bits).rev() {
        for xi in x {
            key = (key << 1) | ((xi >> b) & 1);
        }
    }
    key
}

fn deinterleave(key: u64, dim: usize, bits: u32) -> Vec<u64> {
    let mut x = vec![0u64; dim];
    let mut shift = dim as u32 * bits;
    for b in (0..bits).rev() {
        for xi in x.iter_mut() {
            shift -= 1;
            *xi |= ((key >> shift) & 1) << b;
        }
    }
    x
}

fn axes_to_transpose(x: &mut [u64], bits: u32) {
    let n = x.len();
    let m = 1u64 << (bits - 1);
    let mut q = m;
    while q > 1 {
        let p = q - 1;
        for i in 0..n {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q >>= 1;
    }
    for i in 1..n {
        x[i] ^= x[i - 1];
    }
    let mut t = 0u64;
    q = m;
    while q > 1 {
        if x[n - 1] & q != 0 {
            t ^= q - 1;
        }
        q >>= 1;
    }
    for xi in x.iter_mut() {
        *xi ^= t;
    }
}

fn transpose_to_axes(x: &mut [u64], bits: u32) {
    let n = x.len();
    let top = 2u64 << (bits - 1);
    let t = x[n - 1] >> 1;
    for i in (1..n).rev() {
        x[i] ^= x[i - 1];
    }
    x[0] ^= t;
    let mut q = 2u64;
    while q != top {
        let p = q - 1;
        for i in (0..n).rev() {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q <<= 1;
    }
}

/// `psi~(x) = 1/2 + (sqrt(4 + x^2) - 2) / (2x)`, with `psi~(0) = 1/2`.
///
/// Evaluated as `1/2 + x / (2 (sqrt(4 + x^2) + 2))`, which is the same
/// function without the cancellation near zero.
pub fn psi_tilde(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    Ok(0.5 + x / (2.0 * ((4.0 + x * x).sqrt() + 2.0)))
}

/// Inverse of [`psi_tilde`] on `(0, 1)`: `x = 8s / (1 - 4s^2)` with `s = y - 1/2`.
pub fn psi_tilde_inverse(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::OutOfUnitInterval { value: y });
    }
    let s = y - 0.5;
    // 1 - 4 s^2 = (1 - 2s)(1 + 2s) = 4 y (1 - y)
    Ok(2.0 * s / (y * (1.0 - y)))
}

/// One axis of a cubifying map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisMap {
    /// The whole real line through [`psi_tilde`].
    RealLine,
    /// The open interval `(lo, hi)` mapped affinely.
    Interval { lo: f64, hi: f64 },
}

impl AxisMap {
    pub fn apply(&self, axis: usize, x: f64) -> Result<f64> {
        match *self {
            AxisMap::RealLine => psi_tilde(x).map_err(|_| Error::DomainViolation { axis, value: x }),
            AxisMap::Interval { lo, hi } => {
                if !(x > lo && x < hi) {
                    return Err(Error::DomainViolation { axis, value: x });
                }
                Ok((x - lo) / (hi - lo))
            }
        }
    }

    pub fn invert(&self, y: f64) -> Result<f64> {
        match *self {
            AxisMap::RealLine => psi_tilde_inverse(y),
            AxisMap::Interval { lo, hi } => {
                if !(y > 0.0 && y < 1.0) {
                    return Err(Error::OutOfUnitInterval { value: y });
                }
                Ok(lo + y * (hi - lo))
            }
        }
    }
}

/// Per-axis increasing bijections from the state space onto `(0,1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubifyingMap {
    axes: Vec<AxisMap>,
}

impl CubifyingMap {
    /// `psi~` on every axis, for states in `R^d`.
    pub fn real_line(dim: usize) -> Self {
        CubifyingMap {
            axes: vec![AxisMap::RealLine; dim],
        }
    }

    pub fn new(axes: Vec<AxisMap>) -> Result<Self> {
        for a in &axes {
            if let AxisMap::Interval { lo, hi } = *a {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidArgument(format!(
                        "interval ({lo}, {hi}) is not a finite nonempty interval"
                    )));
                }
            }
        }
        Ok(CubifyingMap { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.axes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.axes.len(),
                got: x.len(),
            });
        }
        self.axes
            .iter()
            .zip(x)
            .enumerate()
            .map(|(axis, (m, &v))| m.apply(axis, v))
            .collect()
    }

    pub fn invert(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.axes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.axes.len(),
                got: y.len(),
            });
        }
        self.axes.iter().zip(y).map(|(m, &v)| m.invert(v)).collect()
    }
}

/// Permutation ordering the particles along the Hilbert curve.
///
/// Entry `k` is the original index of the `k`-th particle in curve order;
/// ties keep the original index order. For `d = 1` this is a plain stable
/// sort of the states.
pub fn hilbert_sort(
    system: &WeightedParticleSystem,
    map: &CubifyingMap,
    codec: &HilbertCodec,
) -> Result<Vec<usize>> {
    let d = system.dim();
    if map.dim() != d || codec.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if map.dim() != d { map.dim() } else { codec.dim() },
        });
    }
    let n = system.len();
    let mut perm: Vec<usize> = (0..n).collect();
    if d == 1 {
        for i in 0..n {
            map.apply(system.state(i))?;
        }
        let states = system.states();
        perm.sort_by(|&a, &b| states[a].total_cmp(&states[b]));
        return Ok(perm);
    }
    let mut keys = Vec::with_capacity(n);
    for i in 0..n {
        let mut y = map.apply(system.state(i))?;
        for v in y.iter_mut() {
            *v = v.clamp(0.0, BELOW_ONE);
        }
        keys.push(codec.encode(&y)?);
    }
    perm.sort_by_key(|&i| keys[i]);
    Ok(perm)
}

/// Base schemes that have an ordered variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderedBase {
    Stratified,
    Systematic,
    DeterministicAlpha(f64),
}

impl OrderedBase {
    pub fn scheme(&self) -> resample::Scheme {
        match *self {
            OrderedBase::Stratified => resample::Scheme::Stratified,
            OrderedBase::Systematic => resample::Scheme::Systematic,
            OrderedBase::DeterministicAlpha(a) => resample::Scheme::DeterministicAlpha(a),
        }
    }
}

/// Maps a result computed on the permuted system back to original indices.
pub(crate) fn unpermute(
    permuted: ResampleResult,
    perm: &[usize],
    system: &WeightedParticleSystem,
) -> Result<ResampleResult> {
    let ancestors = permuted.ancestors.iter().map(|&a| perm[a]).collect();
    ResampleResult::from_ancestors(ancestors, system.weights())
}

/// Runs `base` on the Hilbert-ordered system and reports ancestors in the
/// original indexing.
pub fn ordered_resample<S: UniformSource + ?Sized>(
    system: &WeightedParticleSystem,
    base: OrderedBase,
    map: &CubifyingMap,
    codec: &HilbertCodec,
    source: &mut S,
) -> Result<ResampleResult> {
    let perm = hilbert_sort(system, map, codec)?;
    let weights = system.weights().permuted(&perm);
    let r = base.scheme().resample(&weights, source)?;
    unpermute(r, &perm, system)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn psi_tilde_values() {
        assert_eq!(psi_tilde(0.0).unwrap(), 0.5);
        let expected = 0.5 + (8f64.sqrt() - 2.0) / 4.0;
        assert!((psi_tilde(2.0).unwrap() - expected).abs() < 1e-15);
        assert!((psi_tilde(2.0).unwrap() - 0.7071067).abs() < 1e-7);
        for &x in &[0.1, 1.0, 3.7, 25.0, 1e4] {
            let s = psi_tilde(x).unwrap() + psi_tilde(-x).unwrap();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!(psi_tilde(f64::NAN).is_err());
    }

    #[test]
    fn psi_tilde_matches_printed_form() {
        for &x in &[-7.5f64, -1.0, -0.3, 0.3, 1.0, 7.5] {
            let printed = 0.5 + ((4.0 + x * x).sqrt() - 2.0) / (2.0 * x);
            assert!((psi_tilde(x).unwrap() - printed).abs() < 1e-14);
        }
    }

    #[test]
    fn psi_tilde_round_trip() {
        for i in -500..=500 {
            let x = i as f64 * 0.1;
            let back = psi_tilde_inverse(psi_tilde(x).unwrap()).unwrap();
            assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0), "{x} -> {back}");
        }
    }

    #[test]
    fn order_one_square() {
        let c = HilbertCodec::new(2, 1).unwrap();
        let visits: Vec<Vec<f64>> = (0..4).map(|k| c.decode(k).unwrap()).collect();
        assert_eq!(
            visits,
            vec![vec![0.0, 0.0], vec![0.0, 0.5], vec![0.5, 0.5], vec![0.5, 0.0]]
        );
        assert_eq!(c.encode(&[0.75, 0.25]).unwrap(), 3);
    }

    #[test]
    fn identity_curve_in_one_dimension() {
        let c = HilbertCodec::new(1, 10).unwrap();
        for k in 0..1024 {
            assert_eq!(c.decode(k).unwrap(), vec![k as f64 / 1024.0]);
        }
        assert_eq!(c.encode(&[0.3]).unwrap(), (0.3f64 * 1024.0).floor() as u64);
    }

    #[test]
    fn codec_errors() {
        assert!(HilbertCodec::new(3, 21).is_err());
        assert!(HilbertCodec::new(0, 3).is_err());
        let c = HilbertCodec::new(2, 3).unwrap();
        assert!(matches!(c.decode(64), Err(Error::KeyOutOfRange { .. })));
        assert!(matches!(
            c.encode(&[1.0, 0.2]),
            Err(Error::CoordinateOutOfRange { axis: 0, .. })
        ));
        assert!(matches!(
            c.encode(&[0.5, -0.1]),
            Err(Error::CoordinateOutOfRange { axis: 1, .. })
        ));
    }

    #[test]
    fn sort_examples() {
        let sys = WeightedParticleSystem::univariate(vec![0.9, 0.1, 0.5], &[1.0; 3]).unwrap();
        let perm = hilbert_sort(&sys, &CubifyingMap::real_line(1), &HilbertCodec::for_dim(1).unwrap())
            .unwrap();
        assert_eq!(perm, vec![1, 2, 0]);

        let sys = WeightedParticleSystem::univariate(vec![3.0], &[1.0]).unwrap();
        let perm = hilbert_sort(&sys, &CubifyingMap::real_line(1), &HilbertCodec::for_dim(1).unwrap())
            .unwrap();
        assert_eq!(perm, vec![0]);

        let unit = CubifyingMap::new(vec![AxisMap::Interval { lo: 0.0, hi: 1.0 }; 2]).unwrap();
        let sys = WeightedParticleSystem::new(vec![0.1, 0.1, 0.9, 0.1, 0.1, 0.9], 2, &[1.0; 3])
            .unwrap();
        let perm = hilbert_sort(&sys, &unit, &HilbertCodec::new(2, 1).unwrap()).unwrap();
        assert_eq!(perm, vec![0, 2, 1]);
    }

    #[test]
    fn interval_map_domain() {
        let m = CubifyingMap::new(vec![AxisMap::Interval { lo: -1.0, hi: 1.0 }]).unwrap();
        assert!(matches!(
            m.apply(&[1.0]),
            Err(Error::DomainViolation { axis: 0, .. })
        ));
        let y = m.apply(&[0.5]).unwrap();
        assert_eq!(y, vec![0.75]);
        assert_eq!(m.invert(&y).unwrap(), vec![0.5]);
    }
}
