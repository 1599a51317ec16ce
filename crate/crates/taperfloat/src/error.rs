use std::fmt;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// Paired sequences have different lengths.
    LengthMismatch { left: usize, right: usize },
    /// Matrix dimensions do not agree.
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    /// An operation with no defined result (zero times infinity, infinity
    /// divided by infinity, ...).
    InvalidOperation(&'static str),
    /// The accumulator saturated; the sign of the out-of-range result is kept.
    Saturated { negative: bool },
    /// Division by zero where the result is not representable.
    DivideByZero,
    /// A format or engine configuration violates its constraints.
    Config(String),
    /// Text input (format descriptor, decimal number, matrix file) failed to parse.
    Parse(String),
    /// Exponent outside the format's representable range.
    ExponentOutOfRange { exponent: i64 },
    /// Input value is NaN or infinite where a finite value is required.
    NonFinite,
    /// A bit pattern with no meaning in the configured format (IEEE-style NaN,
    /// denormals when flushing is disabled).
    Unsupported(&'static str),
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::ShapeMismatch { left, right } => write!(
                f,
                "shape mismatch: {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::InvalidOperation(what) => write!(f, "invalid operation: {what}"),
            Error::Saturated { negative } => write!(
                f,
                "accumulator saturated ({})",
                if *negative { "negative" } else { "positive" }
            ),
            Error::DivideByZero => write!(f, "division by zero"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::ExponentOutOfRange { exponent } => {
                write!(f, "exponent {exponent} outside format range")
            }
            Error::NonFinite => write!(f, "value is not finite"),
            Error::Unsupported(what) => write!(f, "unsupported encoding: {what}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
