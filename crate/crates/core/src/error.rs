use thiserror::Error;

/// Errors raised by the discounted OCO library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("gradient norm {norm} exceeds bound G = {bound}")]
    GradientBound { norm: f64, bound: f64 },

    #[error("bit {0} outside [-1, 1]")]
    BitOutOfRange(f64),

    #[error("loss value {value} outside [0, GD] = [0, {gd}]")]
    LossOutOfRange { value: f64, gd: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("threshold bracket failure: g_tilde({upper}) = {value} < 1")]
    BracketFailure { upper: f64, value: f64 },

    #[error("round {got} requested, expected round {expected}")]
    RoundOrder { expected: usize, got: usize },

    #[error("unknown {what}: `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
