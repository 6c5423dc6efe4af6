use thiserror::Error;

/// Errors raised by the resampling, ordering, diagnostic and filtering routines.
///
/// Indices carried in the variants are zero-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("value at position {index} is not finite")]
    NonFinite { index: usize },
    #[error("particle system is empty")]
    EmptySystem,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("offspring counts sum to {got}, expected {expected}")]
    CountMismatch { expected: usize, got: usize },
    #[error("ancestor index {index} out of range for {n} particles")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("rounding input sums to {sum}, which is not an integer")]
    NonIntegerTotal { sum: f64 },
    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("hilbert key {key} out of range for {bits} bits")]
    KeyOutOfRange { key: u64, bits: u32 },
    #[error("coordinate {value} on axis {axis} is outside [0, 1)")]
    CoordinateOutOfRange { axis: usize, value: f64 },
    #[error("invalid hilbert precision: d={dim}, m={levels} (need d >= 1, m >= 1, m*d <= 62)")]
    InvalidPrecision { dim: usize, levels: u32 },
    #[error("state {value} on axis {axis} lies outside the domain of the cubifying map")]
    DomainViolation { axis: usize, value: f64 },
    #[error("point {value} is outside [0, 1]")]
    OutOfUnitInterval { value: f64 },
    #[error("variance estimate is zero at N={n}")]
    DegenerateVariance { n: usize },
    #[error("covariance matrix is not positive definite at step {step}")]
    NonPosDefCovariance { step: usize },
    #[error("auxiliary function vanishes at particle {index} which carries positive weight")]
    ZeroAuxiliaryWeight { index: usize },
    #[error("all particle weights vanished at step {step}")]
    WeightsVanished { step: usize },
    #[error("scheme {0} is not supported here")]
    UnsupportedScheme(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
