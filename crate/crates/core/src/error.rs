use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The bit stream ended in the middle of a codeword or grammar.
    #[error("truncated stream: {0}")]
    Truncated(String),

    /// The bit stream does not decode to a valid value.
    #[error("corrupt stream: {0}")]
    Corrupt(String),

    /// A structural precondition of the input was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
