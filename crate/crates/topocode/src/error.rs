use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid digit string: {0}")]
    BadDigits(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("ring mismatch")]
    RingMismatch,
    #[error("index {index} out of range for order {order}")]
    IndexOutOfRange { index: i64, order: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("missing color on {0}")]
    MissingColor(String),
    #[error("merge would create a {kind} at {u}-{v}")]
    BadMerge { kind: &'static str, u: usize, v: usize },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("missing material: {0}")]
    MissingMaterial(String),
    #[error("authentication failed at {step}: {reason}")]
    AuthFailed { step: String, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
