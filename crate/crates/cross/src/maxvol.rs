use nalgebra::DMatrix;

use crate::CrossError;

pub const DEFAULT_DOMINANCE_TOL: f64 = 0.01;
pub const DEFAULT_SWAP_CAP: usize = 200;

#[derive(Debug, Clone)]
pub struct MaxvolResult {
    /// Selected row indices; entry `j` is the row standing in for pivot
    /// column `j`.
    pub indices: Vec<usize>,
    pub swaps: usize,
    /// False when the swap cap was hit before reaching dominance.
    pub converged: bool,
}

/// Selects `r` rows of a full-column-rank `m x r` matrix whose submatrix has
/// (locally) maximal absolute determinant. On return every entry of
/// `A · A[I, :]^{-1}` is at most `1 + tau` in absolute value; each internal
/// swap multiplies the submatrix determinant by a factor `> 1 + tau`.
pub fn maxvol(a: &DMatrix<f64>) -> Result<MaxvolResult, CrossError> {
    maxvol_with_options(a, DEFAULT_DOMINANCE_TOL, DEFAULT_SWAP_CAP)
}

pub fn maxvol_with_options(
    a: &DMatrix<f64>,
    tau: f64,
    swap_cap: usize,
) -> Result<MaxvolResult, CrossError> {
    let (m, r) = (a.nrows(), a.ncols());
    if m < r {
        return Err(CrossError::InvalidConfig(format!(
            "maxvol needs at least as many rows as columns, got {m} x {r}"
        )));
    }
    if r == 0 {
        return Ok(MaxvolResult { indices: vec![], swaps: 0, converged: true });
    }

    let indices = initial_rows(a)?;
    // B = A · A[I, :]^{-1}, solved through the transposed system.
    let sub = rows(a, &indices);
    let bt = sub
        .transpose()
        .lu()
        .solve(&a.transpose())
        .ok_or_else(|| CrossError::RankDeficient("pivot submatrix is singular".into()))?;
    let mut b = bt.transpose();
    let mut indices = indices;

    let mut swaps = 0;
    loop {
        // Dominant entry; ties broken toward the lowest (row, col) pair.
        let (mut bi, mut bj, mut bv) = (0usize, 0usize, 0.0f64);
        for i in 0..m {
            for j in 0..r {
                let v = b[(i, j)].abs();
                if v > bv {
                    (bi, bj, bv) = (i, j, v);
                }
            }
        }
        if bv <= 1.0 + tau {
            return Ok(MaxvolResult { indices, swaps, converged: true });
        }
        if swaps >= swap_cap {
            return Ok(MaxvolResult { indices, swaps, converged: false });
        }
        // Swap row bi into pivot slot bj and rank-one update B.
        let pivot = b[(bi, bj)];
        let col = b.column(bj).clone_owned();
        let mut row = b.row(bi).clone_owned();
        row[(0, bj)] -= 1.0;
        for i in 0..m {
            let ci = col[i] / pivot;
            if ci == 0.0 {
                continue;
            }
            for j in 0..r {
                b[(i, j)] -= ci * row[(0, j)];
            }
        }
        indices[bj] = bi;
        swaps += 1;
    }
}

/// Initial row choice by Gaussian elimination with row pivoting; returns one
/// row per column in pivot order.
fn initial_rows(a: &DMatrix<f64>) -> Result<Vec<usize>, CrossError> {
    let (m, r) = (a.nrows(), a.ncols());
    let mut work = a.clone();
    let mut picked: Vec<usize> = Vec::with_capacity(r);
    let mut used = vec![false; m];
    for j in 0..r {
        let (mut best, mut best_v) = (usize::MAX, 0.0f64);
        for i in 0..m {
            if used[i] {
                continue;
            }
            let v = work[(i, j)].abs();
            if v > best_v {
                (best, best_v) = (i, v);
            }
        }
        if best == usize::MAX || best_v == 0.0 {
            return Err(CrossError::RankDeficient(format!(
                "no usable pivot in column {j}"
            )));
        }
        used[best] = true;
        picked.push(best);
        let pivot = work[(best, j)];
        for i in 0..m {
            if used[i] && i != best {
                continue;
            }
            let f = work[(i, j)] / pivot;
            if f == 0.0 || i == best {
                continue;
            }
            for jj in j..r {
                let sub = f * work[(best, jj)];
                work[(i, jj)] -= sub;
            }
        }
    }
    Ok(picked)
}

pub(crate) fn rows(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), a.ncols(), |i, j| a[(idx[i], j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn det_of_rows(a: &DMatrix<f64>, idx: &[usize]) -> f64 {
        rows(a, idx).determinant()
    }

    #[test]
    fn identity_over_zeros_selects_identity_rows() {
        let r = 4;
        let m = 2 * r;
        let a = DMatrix::from_fn(m, r, |i, j| if i == j { 1.0 } else { 0.0 });
        let res = maxvol(&a).unwrap();
        let mut got = res.indices.clone();
        got.sort_unstable();
        assert_eq!(got, vec![0, 1, 2, 3]);
        assert_eq!(res.swaps, 0);
    }

    #[test]
    fn single_column_picks_largest_entry() {
        let a = DMatrix::from_column_slice(3, 1, &[1.0, 3.0, 2.0]);
        let res = maxvol(&a).unwrap();
        assert_eq!(res.indices, vec![1]);
    }

    #[test]
    fn dominance_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = DMatrix::from_fn(30, 4, |_, _| rng.random_range(-1.0..1.0));
            let res = maxvol(&a).unwrap();
            assert!(res.converged);
            let sub = rows(&a, &res.indices);
            let b = sub.transpose().lu().solve(&a.transpose()).unwrap().transpose();
            let max_abs = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            assert!(max_abs <= 1.01 + 1e-9, "dominance violated: {max_abs}");
        }
    }

    #[test]
    fn volume_beats_random_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(50, 4, |_, _| rng.random_range(-1.0..1.0));
        let res = maxvol(&a).unwrap();
        let chosen = det_of_rows(&a, &res.indices).abs();
        for _ in 0..1000 {
            let mut idx: Vec<usize> = Vec::new();
            while idx.len() < 4 {
                let c = rng.random_range(0..50);
                if !idx.contains(&c) {
                    idx.push(c);
                }
            }
            let v = det_of_rows(&a, &idx).abs();
            assert!(chosen >= v - 1e-9, "random subset beat maxvol: {v} > {chosen}");
        }
    }

    #[test]
    fn swaps_strictly_increase_volume() {
        // Rerun the algorithm manually, tracking |det| across swaps: each
        // accepted swap multiplies the volume by the pivot magnitude > 1.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(40, 5, |_, _| rng.random_range(-1.0..1.0));
        // Start from a deliberately poor initial set to force swaps.
        let mut indices: Vec<usize> = (0..5).collect();
        let mut last = det_of_rows(&a, &indices).abs();
        assert!(last > 0.0);
        for _ in 0..200 {
            let sub = rows(&a, &indices);
            let b = sub.transpose().lu().solve(&a.transpose()).unwrap().transpose();
            let (mut bi, mut bj, mut bv) = (0usize, 0usize, 0.0f64);
            for i in 0..40 {
                for j in 0..5 {
                    let v = b[(i, j)].abs();
                    if v > bv {
                        (bi, bj, bv) = (i, j, v);
                    }
                }
            }
            if bv <= 1.01 {
                break;
            }
            indices[bj] = bi;
            let now = det_of_rows(&a, &indices).abs();
            assert!(now > last, "swap did not increase volume: {now} <= {last}");
            last = now;
        }
    }

    #[test]
    fn rank_deficient_is_reported() {
        let a = DMatrix::from_fn(6, 2, |i, _| i as f64); // two equal columns
        assert!(matches!(maxvol(&a), Err(CrossError::RankDeficient(_))));
    }
}
