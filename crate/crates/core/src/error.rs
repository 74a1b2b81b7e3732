use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The call is malformed: mismatched dimensions, empty grids, bad options.
    #[error("usage error: {0}")]
    Usage(String),
    /// The requested statement is not established for these parameters.
    #[error("unsupported claim: {0}")]
    UnsupportedClaim(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
