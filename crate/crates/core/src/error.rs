use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in mode {mode}: expected {expected}, got {got}")]
    Dimension {
        mode: usize,
        expected: usize,
        got: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("value {value} at index {index:?} is outside the divergence domain: {reason}")]
    EntryDomain {
        index: Vec<usize>,
        value: f64,
        reason: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration budget exceeded: {count} evaluations required, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
