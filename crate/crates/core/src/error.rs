use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("circulant embedding failed: minimum eigenvalue {min_eigenvalue:e} at embedding size {size}")]
    Circulant { min_eigenvalue: f64, size: usize },

    #[error("solution diverged at step {index}")]
    Divergence { index: usize },

    #[error("point {0:?} is outside the sampled box (minus the kernel margin)")]
    Extrapolation(Vec<f64>),

    #[error("regularity {0} is not supported (must be <= 1)")]
    UnsupportedRegularity(f64),

    #[error("time {time} lies before the recorded Wiener window starting at {window_start}")]
    Window { time: f64, window_start: f64 },

    #[error("assignment problem of size {size} exceeds the cap of {cap} points")]
    AssignmentCap { size: usize, cap: usize },

    #[error("quadrature did not converge: estimated error {error:e}")]
    Quadrature { error: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Divergence errors map to a distinct process exit status in the CLI.
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. })
    }
}
