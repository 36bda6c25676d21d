use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid truncation: {0}")]
    Truncation(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("Laplacian inversion needs a zero-mean field, mean coefficient is {0:e}")]
    NonZeroMean(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("singular system")]
    Singular,
    #[error("quadrature under-resolved: {0}")]
    Quadrature(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
