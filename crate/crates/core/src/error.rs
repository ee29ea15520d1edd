use thiserror::Error;

use crate::spaces::SpaceKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix is not in {kind}: off-subspace residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotInSubspace {
        kind: SpaceKind,
        residual: f64,
        tolerance: f64,
    },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("numeric overflow: non-finite value in {0}")]
    NumericOverflow(String),

    #[error("radial sampler produced an invalid radius {0}")]
    Sampler(f64),

    #[error("unsupported for {kind}: {what}")]
    Unsupported { kind: SpaceKind, what: String },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("polynomial degree {degree} exceeds trace vector length {m}")]
    DegreeOverflow { degree: usize, m: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("insufficient trials: {0}")]
    InsufficientTrials(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
