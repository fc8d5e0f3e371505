use thiserror::Error;

/// Errors reported by the kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular argument: {0}")]
    SingularArgument(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("non-integrable atom: {0}")]
    NonIntegrableAtom(String),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("state is terminal")]
    Terminal,
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
