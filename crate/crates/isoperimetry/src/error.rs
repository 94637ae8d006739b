use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] gammalab_core::Error),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain mask is not 4-connected ({components} components)")]
    Disconnected { components: usize },
    #[error("volume {volume} is not attainable; nearest attainable volumes are {below} and {above}")]
    Unattainable { volume: f64, below: f64, above: f64 },
    #[error("{cells} cells is too many for exhaustive enumeration (max {max}); use the annealing heuristic instead")]
    TooManyCells { cells: usize, max: usize },
    #[error("erosion by tau = {tau} leaves an empty set")]
    EmptyErosion { tau: f64 },
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}
