use thiserror::Error;

use crate::grid::GridCube;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),

    #[error("scale range exhausted: no covering cube for {cube:?} (best ratio needed <= {bound})")]
    ScaleRangeExhausted { cube: GridCube, bound: u64 },

    #[error("dyadic grid misaligned with cells: {0}")]
    Misaligned(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("universe too small: {0}")]
    UniverseTooSmall(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
