use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QposError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// Signals a bug: a state the algorithms guarantee cannot be reached.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, QposError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(QposError::DimensionMismatch { expected, got })
    }
}
