use alloc::string::String;
use thiserror::Error;

/// Errors raised by constructions, bound evaluation and checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("support of size {size} exceeds enumeration cap {cap}")]
    SupportTooLarge { size: u128, cap: u128 },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("rejection sampler exhausted {0} iterations")]
    RejectionExhausted(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
