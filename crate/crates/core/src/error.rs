use thiserror::Error;

/// Errors produced by the verification library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero polynomial cannot be normalized")]
    ZeroPolynomial,

    #[error("function is constant: {0}")]
    Degenerate(String),

    #[error("line slice leaves the unit ball: halflength {halflength} exceeds admissible {limit}")]
    SliceExitsBall { halflength: f64, limit: f64 },

    #[error("direction is not a unit vector (norm {0})")]
    NonUnitDirection(f64),

    #[error("point is too close to the pole of the Moebius factor (|1 - A z| = {0:e})")]
    PoleProximity(f64),

    #[error("{field}: {reason}")]
    OutOfDomain { field: &'static str, reason: String },

    #[error("function vanishes at {0}")]
    VanishesAt(f64),

    #[error("set E is empty or has zero length")]
    EmptySet,

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{0}")]
    InsufficientSamples(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::OutOfDomain {
            field,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
