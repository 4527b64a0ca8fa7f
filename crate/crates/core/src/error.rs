use thiserror::Error;

use crate::exactfield::FieldError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("unsupported root system or rank: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate ratio: {0}")]
    Degenerate(String),
    #[error("singular phase at n = {n}")]
    SingularPhase { n: i64 },
    #[error("singular phase in direction {direction} at n = {n}")]
    SingularDirection { direction: usize, n: i64 },
    #[error("point is outside the rational span")]
    OutsideRationalSpan,
    #[error("star does not give a scalar frame: {0}")]
    NonScalarFrame(String),
    #[error("inconsistent constraint system: {0}")]
    Inconsistent(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("computation failed: {0}")]
    Computation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Unsupported(_) | Error::Invalid(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
