use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("invalid quantizer: {0}")]
    InvalidSpec(#[from] SpecError),

    #[error("degenerate quantizer: all levels are zero, gamma is undefined")]
    DegenerateQuantizer,

    #[error("root not bracketed: f({lo}) and f({hi}) have the same sign")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("iteration limit of {0} reached without convergence")]
    NoConvergence(usize),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

/// Violations of the [`QuantizerSpec`](crate::QuantizerSpec) invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("K must be at least 1")]
    ZeroHalfLevels,

    #[error("level count mismatch: K = {expected} requires {expected} levels, found {found}")]
    LevelCountMismatch { expected: usize, found: usize },

    #[error("threshold count mismatch: K = {k} requires {expected} thresholds, found {found}")]
    ThresholdCountMismatch {
        k: usize,
        expected: usize,
        found: usize,
    },

    #[error("threshold {index} is not a positive finite number")]
    NonPositiveThreshold { index: usize },

    #[error("thresholds not strictly increasing at index {index}")]
    NonIncreasingThresholds { index: usize },

    #[error("level {index} is negative or not finite")]
    InvalidLevel { index: usize },
}
