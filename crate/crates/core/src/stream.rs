//! Seeded, replayable uniform streams.
//!
//! A stream is identified by `(seed, stream_id)` and backed by ChaCha8 in
//! counter mode, so draw `k` of a stream is a pure function of
//! `(seed, stream_id, k)`. Substreams for nested indices (run, time step,
//! purpose) are derived by folding the path into a single stream id.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds an index path into one 64-bit identifier.
pub fn fold_path(path: &[u64]) -> u64 {
    path.iter().fold(GOLDEN, |acc, &p| {
        mix64(acc.rotate_left(17) ^ mix64(p.wrapping_add(GOLDEN)))
    })
}

/// Seed for replicate `index` under a parent seed.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_mul(GOLDEN).wrapping_add(1)))
}

/// A deterministic stream of uniforms on the open interval (0, 1).
#[derive(Debug, Clone)]
pub struct UniformStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
    drawn: u64,
}

impl UniformStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        UniformStream {
            seed,
            stream_id,
            rng,
            drawn: 0,
        }
    }

    /// The substream addressed by `path` under `seed`.
    pub fn derive(seed: u64, path: &[u64]) -> Self {
        Self::new(seed, fold_path(path))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of uniforms drawn so far.
    pub fn counter(&self) -> u64 {
        self.drawn
    }

    /// Next uniform, strictly inside (0, 1) with 53-bit resolution.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        self.drawn += 1;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate.
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn uniforms(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_uniform()).collect()
    }
}

/// Anything that hands out uniforms one at a time.
///
/// Implemented by [`UniformStream`] and by fixed slices, so the schemes can
/// be driven by hand-picked values in tests.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

impl UniformSource for UniformStream {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        UniformStream::next_uniform(self)
    }
}

/// Replays a fixed list of uniforms; panics when exhausted.
#[derive(Debug, Clone)]
pub struct FixedUniforms<'a> {
    values: &'a [f64],
    pos: usize,
}

impl<'a> FixedUniforms<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        FixedUniforms { values, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl UniformSource for FixedUniforms<'_> {
    fn next_uniform(&mut self) -> f64 {
        let u = self.values[self.pos];
        self.pos += 1;
        u
    }
}

/// Counts how many uniforms a source hands out.
#[derive(Debug)]
pub struct CountingSource<'a, S: UniformSource> {
    inner: &'a mut S,
    pub count: usize,
}

impl<'a, S: UniformSource> CountingSource<'a, S> {
    pub fn new(inner: &'a mut S) -> Self {
        CountingSource { inner, count: 0 }
    }
}

impl<S: UniformSource> UniformSource for CountingSource<'_, S> {
    fn next_uniform(&mut self) -> f64 {
        self.count += 1;
        self.inner.next_uniform()
    }
}
