use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what}: needs {needed} operations, cap is {cap} (set PSET_DISC_MAX_OPS to raise it)")]
    CapExceeded {
        what: &'static str,
        needed: f64,
        cap: u64,
    },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("weight tail diverges: {0}")]
    Divergent(String),

    #[error("product weights are not non-increasing at index {0}")]
    NonMonotone(usize),

    #[error("weight file line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
