use crate::CrossReport;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CrossError {
    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("function returned non-finite value {value} at index {index:?}")]
    NonFinite { index: Vec<usize>, value: f64 },

    #[error("evaluation budget {budget} exceeded after {} calls", .partial.evals)]
    BudgetExceeded { budget: usize, partial: CrossReport },

    #[error(transparent)]
    Tensor(#[from] ttrel_core::TtError),
}
