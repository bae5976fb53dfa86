use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("test function `{name}` is degenerate (margin {margin:e} along direction {direction:?})")]
    Degenerate {
        name: String,
        margin: f64,
        direction: Vec<f64>,
    },

    #[error("field is not scalar-valued (dimension {0})")]
    NotScalar(usize),

    #[error("test function `{0}` does not have vanishing integral")]
    NonzeroIntegral(String),

    #[error("multiplier is not unimodular at atom {0}")]
    NotUnimodular(usize),

    #[error("negative entry in nonnegative field at index {0}")]
    Negative(usize),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
