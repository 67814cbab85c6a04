use thiserror::Error;

use crate::eigen::ViolationResult;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("n_settings must be ≥ 2 (got {0})")]
    TooFewSettings(usize),

    #[error("n_outcomes must be ≥ 1 (got {0})")]
    TooFewOutcomes(usize),

    #[error("zero vector")]
    ZeroVector,

    #[error("empty coefficient list")]
    EmptyState,

    #[error("coefficient {index} is negative ({value})")]
    NegativeCoefficient { index: usize, value: f64 },

    #[error("coefficient {index} is not finite")]
    NonFiniteCoefficient { index: usize },

    #[error("state is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matvec engine was built for a different matrix")]
    EngineMismatch,

    #[error("index out of range: {what} = {value} (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("probability table too large: d = {d} exceeds {max}")]
    TableTooLarge { d: usize, max: usize },

    #[error("dense eigensolver limited to d ≤ {max} (got {d})")]
    DenseTooLarge { d: usize, max: usize },

    #[error("entropy undefined for d=1")]
    EntropyUndefined,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("instance too large: {count} strategy pairs exceeds cap {cap}")]
    InstanceTooLarge { count: u128, cap: u64 },

    #[error("empty grid")]
    EmptyGrid,

    #[error(
        "power iteration did not converge in {} iterations (residual {:.3e})",
        .partial.iterations_used,
        .partial.residual
    )]
    NotConverged { partial: Box<ViolationResult> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
