use thiserror::Error;

/// Errors raised by the library. Each variant names the violated precondition.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: point {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate point: {first} and {second} coincide")]
    DuplicatePoint { first: String, second: String },
    #[error("total mass must be positive, got {0}")]
    NonPositiveTotalMass(f64),
    #[error("negative mass {mass} at point {index}")]
    NegativeMass { index: usize, mass: f64 },
    #[error("mass list has {found} entries for {expected} points")]
    MassCount { expected: usize, found: usize },
    #[error("metric exponent p must be >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("graph is disconnected: {0} is unreachable")]
    Disconnected(String),
    #[error("edge ({u}, {v}) has nonpositive weight {w}")]
    NonPositiveWeight { u: String, v: String, w: f64 },
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(String),
    #[error("unknown vertex id {0}")]
    UnknownVertex(String),
    #[error("matrix is not square: row {row} has {found} entries, expected {expected}")]
    NotSquare {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not a valid metric: {0}")]
    InvalidMetric(String),
    #[error("index {index} out of range for space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
    #[error("chain collapse between points {0} and {1}: exponent too large for this quasimetric")]
    ChainCollapse(usize, usize),
    #[error("size guard exceeded: {found} points, limit {limit}")]
    SizeGuard { found: usize, limit: usize },
    #[error("measure is not normalized (total {0})")]
    NotNormalized(f64),
    #[error("coincident images for distinct points {0} and {1}")]
    CoincidentImages(usize, usize),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
