use thiserror::Error;

/// Errors raised by the transforms, builders and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integration range too narrow: {0}")]
    Truncation(String),
    #[error(
        "low-pass window clamped too deep: depth {depth:.3e} at {count} nodes (limit {limit:.1e})"
    )]
    ClampTooDeep {
        depth: f64,
        count: usize,
        limit: f64,
    },
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
