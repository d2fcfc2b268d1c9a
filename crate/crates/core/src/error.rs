use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),

    #[error("matrix dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("resource cap exceeded: {what} would reach {size} (cap {cap})")]
    ResourceCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("malformed word: {0}")]
    MalformedWord(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value not representable in this ring: {0}")]
    NotRepresentable(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
