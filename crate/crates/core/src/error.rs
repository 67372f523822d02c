use thiserror::Error;

#[derive(Debug, Error)]
pub enum KgzError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("length mismatch: grid has {expected} nodes, field has {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("field `{name}` is not real-valued (imaginary residue {residue:.3e})")]
    NotReal { name: String, residue: f64 },
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("reference too coarse: tau_ref = {tau_ref:e} must be <= min(tau)/100 = {limit:e}")]
    ReferenceTooCoarse { tau_ref: f64, limit: f64 },
    #[error("unknown coefficient name `{0}`")]
    UnknownCoefficient(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, KgzError>;
