use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("tag {0:?} is not in the vocabulary")]
    UnknownTag(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("operation requires {expected} model, got {actual}")]
    WrongVariant {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("index has not been trained")]
    Untrained,

    #[error("could not parse prediction: {0}")]
    Parse(String),

    #[error("no parseable prediction after {attempts} attempts")]
    Exhausted { attempts: usize, last_raw: String },

    #[error("provider failed after {attempts} attempts: {message}")]
    Provider { attempts: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
