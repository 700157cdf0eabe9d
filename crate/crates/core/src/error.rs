use thiserror::Error;

/// Errors raised by the structure-learning library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid weight matrix: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid node order: {0}")]
    InvalidOrder(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact MAS search limited to d <= {limit}, got d = {d}")]
    TooLarge { d: usize, limit: usize },
    #[error("graph contains a cycle")]
    Cyclic,
    #[error("empty input: {0}")]
    Empty(String),
    #[error("average precision is undefined without positive labels")]
    NoPositives,
    #[error("objective diverged at iteration {iteration} (value {value})")]
    Diverged { iteration: usize, value: f64 },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(
        "power iteration did not converge after {iterations} iterations (last estimate {estimate})"
    )]
    NoConvergence { iterations: usize, estimate: f64 },
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
