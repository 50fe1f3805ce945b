use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported symbol width {0} (supported widths are 0, 1 and 2)")]
    UnsupportedWidth(usize),

    #[error("solution set is empty")]
    EmptySolution,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("invalid code chain at level {level}: {reason}")]
    InvalidChain { level: usize, reason: String },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("{what} exceeds capacity limit {limit}")]
    CapacityExceeded { what: String, limit: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("unknown output letter {letter} (alphabet size {size})")]
    UnknownLetter { letter: usize, size: usize },
}

impl Error {
    pub(crate) fn capacity(what: impl Into<String>, limit: u64) -> Self {
        Error::CapacityExceeded {
            what: what.into(),
            limit,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
