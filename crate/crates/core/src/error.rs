use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid {field}: {message}")]
    Validation { field: &'static str, message: String },

    /// The threshold formula has a non-positive radicand.
    #[error("below expressible threshold (radicand {radicand})")]
    BelowThreshold { radicand: f64 },

    /// Exhaustive enumeration was requested beyond its configured bound.
    #[error("enumeration bound exceeded: n = {n} > {max}")]
    EnumerationBound { n: usize, max: usize },

    /// Conditioning on an event of probability zero.
    #[error("conditioning event has probability zero")]
    NullEvent,

    /// The sumset bitmap would exceed the configured memory cap.
    #[error("resource cap exceeded: {needed} bytes needed, cap is {cap} bytes")]
    ResourceCap { needed: u64, cap: u64 },

    /// A closed form is singular at the given parameters.
    #[error("singular formula: {0}")]
    Singular(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            field,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
