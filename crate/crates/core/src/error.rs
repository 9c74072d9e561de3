use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn malformed<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Malformed(msg.into()))
}
