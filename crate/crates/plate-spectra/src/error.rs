//! Error type shared across the crate.

/// Crate-wide error type.
///
/// `InvalidArgument` flags misuse of an operation, `OutOfDomain` flags
/// evaluation outside the geometric domain of validity, and
/// `NumericalFailure` flags a breakdown of an algorithm whose preconditions
/// were met syntactically (failed factorization, root bracketing, or a
/// violated well-posedness bound detected at run time).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn out_of_domain(msg: impl Into<String>) -> Self {
        Error::OutOfDomain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }
}
