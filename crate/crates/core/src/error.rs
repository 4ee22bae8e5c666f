//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide error enum.
#[derive(Debug, Error)]
pub enum Error {
    /// A field or symbol contained a NaN/Inf entry.
    #[error("non-finite value at lattice index {index} in {context}")]
    NonFinite { index: usize, context: &'static str },

    /// A Fourier multiplier evaluated to NaN/Inf at a lattice frequency.
    #[error("multiplier returned a non-finite value at frequency {frequency:?}")]
    NonFiniteMultiplier { frequency: Vec<f64> },

    /// Two operands live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A construction needs frequencies the grid cannot represent.
    #[error("frequency reach {required} exceeds the grid Nyquist frequency {nyquist}")]
    NyquistExceeded { required: f64, nyquist: f64 },

    /// A truncated decomposition failed to cover the symbol.
    #[error("decomposition truncation too small: {0}")]
    TruncationTooSmall(String),

    /// File or descriptor parse problem.
    #[error("parse error: {0}")]
    Parse(String),

    /// I/O failure while reading or writing interchange files.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
