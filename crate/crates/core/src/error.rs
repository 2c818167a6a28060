use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("need at least {required} points, got {found}")]
    TooFewPoints { required: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration guard exceeded: {count} tuples > limit {limit}")]
    GuardExceeded { count: u128, limit: u128 },

    #[error("start index {index} out of range for {len} candidates")]
    StartOutOfRange { index: usize, len: usize },

    #[error("external field is +inf at start candidate {0}")]
    InfiniteStart(usize),

    #[error("every candidate scores +inf at step {0}")]
    NoFiniteCandidate(usize),

    #[error("no sign change for root bracket: {0}")]
    NoRoot(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
