use thiserror::Error;

#[derive(Debug, Error)]
pub enum TtError {
    #[error("invalid tensor shape: {0}")]
    InvalidShape(String),

    #[error("index {index} out of range for dimension {dim} (size {size})")]
    IndexOutOfRange { dim: usize, index: usize, size: usize },

    #[error("coordinate {value} outside grid bounds [{lo}, {hi}] in dimension {dim}")]
    OutOfBounds { dim: usize, value: f64, lo: f64, hi: f64 },

    #[error("dense materialization of {elements} elements exceeds cap {cap}")]
    DenseCapExceeded { elements: u128, cap: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("snapshot parse error: {0}")]
    Parse(String),
}
