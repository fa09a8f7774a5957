use thiserror::Error;

/// Errors surfaced by construction and lookup; verification failures are not
/// errors, they are report entries.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed value: wrong dimensions, duplicate labels, non-bijective
    /// reindexing, incompatible operands.
    #[error("structural error: {0}")]
    Structural(String),

    /// A label was not found in the space it was looked up in.
    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    /// Input file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
