use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("input starts outside the modulo range: |g(0)| = {value} >= lambda = {lambda}")]
    UnsupportedStart { value: f64, lambda: f64 },

    #[error("index window [{lo}, {hi}] outside trigger range 0..={last}")]
    Boundary { lo: i64, hi: i64, last: usize },

    #[error("fold detection failed: {0}")]
    Detection(String),

    #[error("trigger density too low: max gap {max_gap:e} s >= pi/omega = {limit:e} s")]
    Density { max_gap: f64, limit: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("divergent configuration: {0}")]
    Divergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("trigger times not strictly increasing at index {index}")]
    NonMonotone { index: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
