use thiserror::Error;

/// Errors raised by the segclust library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input failed validation (bad spec, out-of-range index, bad parameter).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Index or dimension outside the admissible range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// The (d', d'') class contains no partition, so its prior mass is undefined.
    #[error("inadmissible dimensions d'={dprime}, d''={dpp}: no partition has one cluster and several segments")]
    Inadmissible { dprime: usize, dpp: usize },

    /// Brute-force routine refused an input that would blow up combinatorially.
    #[error("size guard: n={n} exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    /// Text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Filesystem failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }

    /// True for errors caused by the environment rather than by the caller's input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
