use thiserror::Error;

use crate::multidouble::Precision;
use crate::pseries::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operands: {0}")]
    InvalidOperands(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("precision mismatch: expected {expected}, found {found}")]
    PrecisionMismatch {
        expected: Precision,
        found: Precision,
    },

    #[error("mode mismatch: expected {expected}, found {found}")]
    ModeMismatch { expected: Mode, found: Mode },

    #[error("unsupported precision: {0} limbs (expected one of 1, 2, 3, 4, 5, 8, 10)")]
    UnsupportedPrecision(usize),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("instance too large for the reference evaluator (cost {cost} > {limit})")]
    OracleGuard { cost: u64, limit: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
