use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operands with mismatched shapes or out-of-range parameters.
    #[error("invalid operand: {0}")]
    InvalidOperand(String),
    /// Bad profile, window, selection context or experiment setup.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data carries no usable variance (e.g. identical plaintexts).
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid hex: {0}")]
    Hex(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
