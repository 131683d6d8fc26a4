use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GmeError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },
    #[error("degenerate state: all coefficients are zero")]
    DegenerateState,
    #[error(
        "numerical consistency error: expectation of positive operator `{label}` is {value:e}"
    )]
    NumericalConsistency { label: String, value: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GmeError>;
