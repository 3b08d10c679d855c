use thiserror::Error;

pub type Result<T> = std::result::Result<T, QoeError>;

#[derive(Debug, Error)]
pub enum QoeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The geometric quantile iteration hit its cap. Carries the best iterate
    /// seen so the caller can decide whether it is usable.
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        best: Vec<f64>,
        residual: f64,
        iterations: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed data: {0}")]
    Format(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(QoeError::InvalidArgument(msg.into()))
}
