//! Tensor-train (TT) representation of discretized multivariate functions.
//!
//! A TT tensor factors a `d`-way array into chained 3-way cores, so that
//! entry `(i_1, ..., i_d)` is the product of matrix slices
//! `A_1(i_1) · A_2(i_2) · ... · A_d(i_d)` with boundary ranks 1. Storage is
//! `sum_k r_{k-1} n_k r_k`, linear in `d` for bounded ranks, versus `n^d`
//! for the dense array.
//!
//! The crate provides exact evaluation at grid multi-indices, continuous
//! evaluation by per-dimension linear interpolation of core slices, dense
//! materialization for small tensors (test oracles), and a plain-text
//! snapshot format for reproducibility.

mod error;
mod grid;
mod tensor;
mod text;

pub use error::TtError;
pub use grid::GridSpec;
pub use tensor::{DenseTensor, TtCore, TtTensor, DEFAULT_DENSE_CAP};
