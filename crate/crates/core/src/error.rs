use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A configuration does not match the parameters it is used with.
    #[error("configuration mismatch: {0}")]
    Configuration(String),

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Index past the end of a sequence.
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// Fewer than `r` ants carry positive popularity.
    #[error(
        "reference pool exhausted at t={t}: {positive} positive-weight ants, {required} required"
    )]
    Exhausted {
        t: usize,
        positive: usize,
        required: usize,
    },

    /// A reference set that does not belong to the current network state.
    #[error("inconsistent reference set: {0}")]
    Consistency(String),

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
