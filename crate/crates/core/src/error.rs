use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("empty interval {0}")]
    EmptyInterval(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("search cap exhausted: {0}")]
    CapExhausted(String),
    #[error("minting failed: {0}")]
    Mint(String),
    #[error("unknown id: {0}")]
    UnknownId(String),
    #[error("invalid tower: {0}")]
    Tower(String),
    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
