use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature on [{a}, {b}] did not reach tolerance (estimated error {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("integration stalled at t = {t}: {reason}")]
    IntegrationStall { t: f64, reason: String },

    #[error("no sign change on [{lo}, {hi}]: {context}")]
    NoBracket { lo: f64, hi: f64, context: String },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("profile has no tail model: {0}")]
    MissingTails(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
