use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HnError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point lies on the excluded pole of the Cayley chart")]
    Pole,
    #[error("kernel is singular on the diagonal")]
    Singular,
    #[error("tail is not integrable: decay exponent {decay} must exceed {bound}")]
    NonIntegrable { decay: f64, bound: f64 },
    #[error("integral diverges: {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, HnError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(HnError::InvalidArgument(msg.into()))
}
