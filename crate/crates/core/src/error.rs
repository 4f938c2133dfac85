use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("body is not strictly convex: {0}")]
    NonConvex(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The input spans an affine subspace of dimension `rank < dim`.
    #[error("degenerate input: points span an affine subspace of dimension {rank} in R^{dim}")]
    Degenerate { rank: usize, dim: usize },

    #[error("{what} did not converge (last value {partial}, error estimate {error})")]
    NoConvergence { what: &'static str, partial: f64, error: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("experiment failed: {0}")]
    Runtime(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the user's configuration rather than the run.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidBody(_) | Error::NonConvex(_))
    }
}
