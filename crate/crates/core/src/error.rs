use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} occurs {count} times, expected {expected}")]
    MultiplicityViolation { value: u32, count: usize, expected: u32 },

    #[error("letter {letter} is outside the alphabet [1, {n}]")]
    AlphabetViolation { letter: u32, n: u32 },

    #[error("search space of {size} elements exceeds the cap of {cap}")]
    SpaceTooLarge { size: String, cap: u64 },

    #[error("no convergence in {what} after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
