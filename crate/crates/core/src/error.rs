use std::fmt;

use crate::space::Space;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: Space, found: Space },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite coordinate produced or supplied")]
    NonFinite,

    #[error("empty point set")]
    Empty,

    #[error("{0}")]
    Parse(ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A parse failure with a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse(ParseError {
            line,
            message: msg.into(),
        })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
