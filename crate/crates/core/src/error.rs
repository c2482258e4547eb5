use thiserror::Error;

/// Errors shared by every module in the crate.
///
/// The CLI maps `InputDomain` and `Parse` to exit code 2 and `Capacity` to
/// exit code 3.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("input-domain error: {0}")]
    InputDomain(String),
    /// An exhaustive routine was asked for more work than its guard allows.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// Malformed graph text.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A state that the arithmetic says cannot happen.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InputDomain(msg.into()))
}

pub(crate) fn capacity<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Capacity(msg.into()))
}
