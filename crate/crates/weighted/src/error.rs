use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] gammalab_core::Error),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("anchor not a minimizer value: reference {reference} < P0 = {p0} at v = {v}")]
    AnchorNotMinimal { v: f64, reference: f64, p0: f64 },
    #[error("domination impossible: no quadratic drop K <= {cap} keeps the surrogate below the reference ({detail})")]
    Domination { cap: f64, detail: String },
    #[error("surrogate is not positive at v = {v} (value {value})")]
    NotPositive { v: f64, value: f64 },
    #[error("non-integrable tail: exponent {exponent} must be < 1")]
    NonIntegrableTail { exponent: f64 },
    #[error("Newton iteration failed at eps = {eps}: {reason} (last residual {residual:e})")]
    Newton { eps: f64, residual: f64, reason: String },
    #[error("{0}")]
    Domain(String),
}
