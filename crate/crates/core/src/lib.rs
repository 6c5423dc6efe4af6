//! Resampling schemes for sequential Monte Carlo.
//!
//! The crate covers the classical schemes (multinomial, stratified,
//! systematic, residual), resampling by Srinivasan's randomized rounding
//! (SSP), and ordered variants that sort particles along the Hilbert curve
//! before stratified or systematic resampling. Around them sit:
//!
//! - [`diagnostics`]: offspring moments, count covariances, discrepancy
//!   metrics and log-log variance-rate fits;
//! - [`smc`]: a particle filter and auxiliary particle filter on
//!   Feynman-Kac models, with a linear Gaussian test model and its exact
//!   Kalman likelihood;
//! - [`bench`]: the reproducible experiment driver behind the
//!   `resample-bench` binary.
//!
//! Every random quantity is drawn from a [`UniformStream`] addressed by a
//! seed and a stream path, so runs are replayable bit for bit.
//!
//! ```
//! use resample_lab::{Resampler, UniformStream, WeightedParticleSystem};
//!
//! let system = WeightedParticleSystem::univariate(vec![0.3, -1.2, 2.5], &[0.2, 0.5, 0.3])?;
//! let scheme: Resampler = "ssp".parse()?;
//! let mut stream = UniformStream::new(42, 0);
//! let result = scheme.resample(&system, &mut stream)?;
//! assert_eq!(result.counts.iter().sum::<usize>(), 3);
//! # Ok::<(), resample_lab::Error>(())
//! ```

pub mod bench;
pub mod diagnostics;
mod error;
pub mod hilbert;
pub mod particles;
pub mod resample;
pub mod resampler;
pub mod smc;
pub mod stream;
pub mod testfn;

pub use error::{Error, Result};
pub use hilbert::{CubifyingMap, HilbertCodec, OrderedBase};
pub use particles::{
    ancestors_to_counts, counts_to_ancestors, inverse_cdf, normalize_weights, CumulativeWeights,
    ResampleResult, WeightedParticleSystem, Weights,
};
pub use resample::Scheme;
pub use resampler::Resampler;
pub use stream::UniformStream;
pub use testfn::TestFn;
