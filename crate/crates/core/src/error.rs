use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to be
/// reported verbatim by the command-line tool.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cannot combine surds from Q(sqrt {left}) and Q(sqrt {right})")]
    FieldMismatch { left: String, right: String },

    #[error("unsupported polygon: {0}")]
    UnsupportedShape(String),

    #[error("certified only {achieved} capacities, {requested} requested")]
    CertificationShortfall { requested: usize, achieved: usize },

    #[error("sequence too short: need index {needed}, have {available}")]
    InsufficientLength { needed: usize, available: usize },

    #[error("search bound exceeded: {0}")]
    SearchBound(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
