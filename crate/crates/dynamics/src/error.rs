use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] gammalab_core::Error),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time step {dt} violates the stability rule ({rule})")]
    Unstable { dt: f64, rule: String },
    #[error("non-finite value at step {step}")]
    NonFinite { step: usize },
    #[error("mass correction {correction} exceeds (b − a)/10 = {limit}: geometry and mass are inconsistent")]
    MassMismatch { correction: f64, limit: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
