use nalgebra::DMatrix;

use crate::{maxvol, pseudo_inverse, CrossError};

pub const PINV_DROP_TOL: f64 = 1e-12;

/// Skeleton (CUR) decomposition: `r` selected columns `C`, `r` selected rows
/// `R`, and their intersection `U`, with `A ~ C U^+ R`.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub col_indices: Vec<usize>,
    pub row_indices: Vec<usize>,
    pub c: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// Rank of `U` at the pseudo-inverse drop tolerance.
    pub effective_rank: usize,
}

impl Skeleton {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let (u_pinv, _) = pseudo_inverse(&self.u, PINV_DROP_TOL);
        &self.c * u_pinv * &self.r
    }
}

/// Rows and columns are chosen by maxvol on the dominant singular factors;
/// exact when `rank(A) <= r`.
pub fn skeleton(a: &DMatrix<f64>, r: usize) -> Result<Skeleton, CrossError> {
    let (m, n) = (a.nrows(), a.ncols());
    if r == 0 || r > m.min(n) {
        return Err(CrossError::InvalidConfig(format!(
            "skeleton rank {r} invalid for a {m} x {n} matrix"
        )));
    }
    let svd = a.clone().svd(true, true);
    let u_fac = svd.u.as_ref().expect("svd with u");
    let vt_fac = svd.v_t.as_ref().expect("svd with v_t");
    let left = u_fac.columns(0, r).clone_owned();
    let right = vt_fac.rows(0, r).transpose();
    let row_indices = maxvol(&left)?.indices;
    let col_indices = maxvol(&right)?.indices;

    let c = DMatrix::from_fn(m, r, |i, j| a[(i, col_indices[j])]);
    let rmat = DMatrix::from_fn(r, n, |i, j| a[(row_indices[i], j)]);
    let u = DMatrix::from_fn(r, r, |i, j| a[(row_indices[i], col_indices[j])]);
    let (_, effective_rank) = pseudo_inverse(&u, PINV_DROP_TOL);
    Ok(Skeleton { col_indices, row_indices, c, u, r: rmat, effective_rank })
}
