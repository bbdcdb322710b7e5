//! Cross approximation: build a TT tensor from a black-box function over
//! grid indices, sampling only at adaptively selected cross positions.
//!
//! The sweep scheme alternates forward passes (updating nested left index
//! sets via maxvol on tall unfoldings) and backward passes (updating right
//! index sets), then assembles interpolation cores from the final index
//! sets. For a function of exact TT rank `<= r` the result reproduces it
//! exactly up to pseudo-inverse round-off.

mod cross;
mod error;
mod maxvol;
mod skeleton;

pub use cross::{tt_cross, CrossConfig, CrossInit, CrossReport};
pub use error::CrossError;
pub use maxvol::{maxvol, maxvol_with_options, MaxvolResult};
pub use skeleton::{skeleton, Skeleton};

pub(crate) fn pseudo_inverse(
    m: &nalgebra::DMatrix<f64>,
    rel_tol: f64,
) -> (nalgebra::DMatrix<f64>, usize) {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let pinv = svd
        .pseudo_inverse(cut)
        .unwrap_or_else(|_| nalgebra::DMatrix::zeros(m.ncols(), m.nrows()));
    (pinv, rank)
}
