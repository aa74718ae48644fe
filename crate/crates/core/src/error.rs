use alloc::string::String;
use core::fmt;

/// Errors raised by graph construction, matching, models and training.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An order or length precondition failed (padding below the current
    /// order, permutation length mismatch, match matrix shape mismatch).
    Size { expected: usize, found: usize },
    /// Attribute vectors of differing dimension were combined.
    DimensionMismatch { expected: usize, found: usize },
    /// Structural validation failure with a human readable reason.
    Invalid(String),
    /// Exhaustive matching was requested above the configured order cap.
    Capacity { order: usize, max: usize },
    /// The model has a zero weight graph, so geometric quantities are undefined.
    DegenerateModel,
    /// Training was called without examples.
    EmptyDataset,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Size { expected, found } => {
                write!(f, "size error: expected {expected}, found {found}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "attribute dimension mismatch: expected {expected}, found {found}")
            }
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::Capacity { order, max } => write!(
                f,
                "order {order} exceeds the exact matcher cap of {max}; use the graduated matcher"
            ),
            Error::DegenerateModel => write!(f, "model has a zero weight graph"),
            Error::EmptyDataset => write!(f, "dataset contains no examples"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
