use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A phase of the protocol had nothing to work with, e.g. the commander
    /// has no unspent copy matching the order it wants to send.
    #[error("degenerate run: {0}")]
    Degenerate(String),

    #[error("unknown name `{name}`, expected one of: {expected}")]
    UnknownName { name: String, expected: &'static str },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
