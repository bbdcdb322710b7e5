use crate::{GridSpec, TtError};

/// Default cap on dense materialization, in elements.
pub const DEFAULT_DENSE_CAP: usize = 10_000_000;

/// One 3-way TT core of shape `(left_rank, n, right_rank)`, stored row-major
/// in that index order.
#[derive(Debug, Clone, PartialEq)]
pub struct TtCore {
    left_rank: usize,
    n: usize,
    right_rank: usize,
    data: Vec<f64>,
}

impl TtCore {
    pub fn new(left_rank: usize, n: usize, right_rank: usize, data: Vec<f64>) -> Result<Self, TtError> {
        if left_rank == 0 || right_rank == 0 || n == 0 {
            return Err(TtError::InvalidShape("core dimensions must be positive".into()));
        }
        if data.len() != left_rank * n * right_rank {
            return Err(TtError::InvalidShape(format!(
                "core data length {} does not match shape ({left_rank}, {n}, {right_rank})",
                data.len()
            )));
        }
        Ok(Self { left_rank, n, right_rank, data })
    }

    /// Core filled from a closure over `(left, node, right)`.
    pub fn from_fn(
        left_rank: usize,
        n: usize,
        right_rank: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(left_rank * n * right_rank);
        for a in 0..left_rank {
            for i in 0..n {
                for b in 0..right_rank {
                    data.push(f(a, i, b));
                }
            }
        }
        Self { left_rank, n, right_rank, data }
    }

    pub fn left_rank(&self) -> usize {
        self.left_rank
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn right_rank(&self) -> usize {
        self.right_rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, b: usize) -> f64 {
        self.data[(a * self.n + i) * self.right_rank + b]
    }

    /// `out = v · A(i)` where `A(i)` is the slice at node `i`.
    #[inline]
    pub fn apply_slice(&self, i: usize, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.left_rank);
        debug_assert_eq!(out.len(), self.right_rank);
        out.fill(0.0);
        for (a, &va) in v.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            let row = (a * self.n + i) * self.right_rank;
            for (b, o) in out.iter_mut().enumerate() {
                *o += va * self.data[row + b];
            }
        }
    }

    /// `out = v · [(1-t) A(i) + t A(i+1)]`, the linearly interpolated slice.
    #[inline]
    pub fn apply_interp(&self, i: usize, t: f64, v: &[f64], out: &mut [f64]) {
        debug_assert!(i + 1 < self.n);
        out.fill(0.0);
        let w0 = 1.0 - t;
        for (a, &va) in v.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            let row0 = (a * self.n + i) * self.right_rank;
            let row1 = row0 + self.right_rank;
            for (b, o) in out.iter_mut().enumerate() {
                *o += va * (w0 * self.data[row0 + b] + t * self.data[row1 + b]);
            }
        }
    }
}

/// Tensor train: chained 3-way cores with matching interface ranks and
/// boundary ranks 1. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TtTensor {
    cores: Vec<TtCore>,
    dims: Vec<usize>,
    ranks: Vec<usize>,
}

impl TtTensor {
    pub fn new(cores: Vec<TtCore>) -> Result<Self, TtError> {
        if cores.is_empty() {
            return Err(TtError::InvalidShape("tensor needs at least one core".into()));
        }
        if cores[0].left_rank != 1 {
            return Err(TtError::InvalidShape("first core must have left rank 1".into()));
        }
        if cores[cores.len() - 1].right_rank != 1 {
            return Err(TtError::InvalidShape("last core must have right rank 1".into()));
        }
        for w in cores.windows(2) {
            if w[0].right_rank != w[1].left_rank {
                return Err(TtError::InvalidShape(format!(
                    "interface rank mismatch: {} vs {}",
                    w[0].right_rank, w[1].left_rank
                )));
            }
        }
        for (k, c) in cores.iter().enumerate() {
            if c.n < 2 {
                return Err(TtError::InvalidShape(format!("dimension {k} has size {} < 2", c.n)));
            }
        }
        let dims = cores.iter().map(|c| c.n).collect();
        let mut ranks = Vec::with_capacity(cores.len() + 1);
        ranks.push(1);
        ranks.extend(cores.iter().map(|c| c.right_rank));
        Ok(Self { cores, dims, ranks })
    }

    pub fn ndim(&self) -> usize {
        self.cores.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Interface ranks `r_0 .. r_d`, with `r_0 = r_d = 1`.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(1)
    }

    pub fn core(&self, k: usize) -> &TtCore {
        &self.cores[k]
    }

    pub fn cores(&self) -> &[TtCore] {
        &self.cores
    }

    /// Total number of stored core elements, `sum_k r_{k-1} n_k r_k`.
    pub fn storage_size(&self) -> usize {
        self.cores.iter().map(|c| c.data.len()).sum()
    }

    fn check_index(&self, idx: &[usize]) -> Result<(), TtError> {
        if idx.len() != self.ndim() {
            return Err(TtError::InvalidShape(format!(
                "index length {} does not match {} dimensions",
                idx.len(),
                self.ndim()
            )));
        }
        for (dim, (&i, &n)) in idx.iter().zip(&self.dims).enumerate() {
            if i >= n {
                return Err(TtError::IndexOutOfRange { dim, index: i, size: n });
            }
        }
        Ok(())
    }

    /// Exact entry at a grid multi-index: the chained product of core slices.
    pub fn eval_discrete(&self, idx: &[usize]) -> Result<f64, TtError> {
        self.check_index(idx)?;
        let mut v = vec![1.0];
        let mut next = Vec::new();
        for (c, &i) in self.cores.iter().zip(idx) {
            next.resize(c.right_rank, 0.0);
            c.apply_slice(i, &v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        Ok(v[0])
    }

    /// Value at a continuous point: each core slice is linearly interpolated
    /// between the bracketing grid nodes, then the slices are chained. At
    /// grid nodes this equals `eval_discrete`. No extrapolation.
    pub fn eval_continuous(&self, grid: &GridSpec, x: &[f64]) -> Result<f64, TtError> {
        if !grid.matches_dims(&self.dims) {
            return Err(TtError::InvalidShape("grid does not match tensor dims".into()));
        }
        if x.len() != self.ndim() {
            return Err(TtError::InvalidShape(format!(
                "point length {} does not match {} dimensions",
                x.len(),
                self.ndim()
            )));
        }
        let mut v = vec![1.0];
        let mut next = Vec::new();
        for (k, (c, &xk)) in self.cores.iter().zip(x).enumerate() {
            let (cell, t) = grid.locate(k, xk)?;
            next.resize(c.right_rank, 0.0);
            c.apply_interp(cell, t, &v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        Ok(v[0])
    }

    /// Dense materialization with the default element cap.
    pub fn full_tensor(&self) -> Result<DenseTensor, TtError> {
        self.full_tensor_with_cap(DEFAULT_DENSE_CAP)
    }

    /// Dense materialization; errors when the element count exceeds `cap`.
    pub fn full_tensor_with_cap(&self, cap: usize) -> Result<DenseTensor, TtError> {
        let elements: u128 = self.dims.iter().map(|&n| n as u128).product();
        if elements > cap as u128 {
            return Err(TtError::DenseCapExceeded { elements, cap });
        }
        let total = elements as usize;
        // Left-to-right contraction: rows hold partial chains for every
        // prefix index combination.
        let mut block: Vec<f64> = vec![1.0]; // shape (1, r_0)
        let mut rows = 1usize;
        for c in &self.cores {
            let (rl, n, rr) = (c.left_rank, c.n, c.right_rank);
            let mut next = vec![0.0; rows * n * rr];
            for row in 0..rows {
                let v = &block[row * rl..(row + 1) * rl];
                for i in 0..n {
                    let out = &mut next[(row * n + i) * rr..(row * n + i + 1) * rr];
                    for (a, &va) in v.iter().enumerate() {
                        let base = (a * n + i) * rr;
                        for (b, o) in out.iter_mut().enumerate() {
                            *o += va * c.data[base + b];
                        }
                    }
                }
            }
            block = next;
            rows *= n;
        }
        debug_assert_eq!(block.len(), total);
        Ok(DenseTensor { dims: self.dims.clone(), data: block })
    }
}

/// Dense row-major tensor, used as the oracle counterpart of small TT tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self, TtError> {
        let total: usize = dims.iter().product();
        if data.len() != total {
            return Err(TtError::InvalidShape(format!(
                "data length {} does not match dims {:?}",
                data.len(),
                dims
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        let mut lin = 0;
        for (&i, &n) in idx.iter().zip(&self.dims) {
            lin = lin * n + i;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    /// Iterates all multi-indices in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let dims = self.dims.clone();
        let total: usize = dims.iter().product();
        (0..total).map(move |mut lin| {
            let mut idx = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                idx[k] = lin % dims[k];
                lin /= dims[k];
            }
            idx
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_2d() -> TtTensor {
        // f(i, j) = a_i * b_j with a = (1, 2), b = (3, 4)
        let c1 = TtCore::new(1, 2, 1, vec![1.0, 2.0]).unwrap();
        let c2 = TtCore::new(1, 2, 1, vec![3.0, 4.0]).unwrap();
        TtTensor::new(vec![c1, c2]).unwrap()
    }

    #[test]
    fn eval_discrete_separable_product() {
        let tt = separable_2d();
        assert_eq!(tt.eval_discrete(&[1, 1]).unwrap(), 8.0);
        assert_eq!(tt.eval_discrete(&[0, 1]).unwrap(), 4.0);
    }

    #[test]
    fn eval_discrete_all_ones() {
        let cores = (0..5)
            .map(|_| TtCore::new(1, 3, 1, vec![1.0; 3]).unwrap())
            .collect();
        let tt = TtTensor::new(cores).unwrap();
        assert_eq!(tt.eval_discrete(&[0, 1, 2, 0, 1]).unwrap(), 1.0);
    }

    #[test]
    fn eval_discrete_out_of_range() {
        let tt = separable_2d();
        assert!(matches!(
            tt.eval_discrete(&[0, 2]),
            Err(TtError::IndexOutOfRange { dim: 1, index: 2, size: 2 })
        ));
    }

    #[test]
    fn eval_continuous_linear_1d() {
        // d = 1 core encoding values (0, 2) on nodes (0, 1)
        let tt = TtTensor::new(vec![TtCore::new(1, 2, 1, vec![0.0, 2.0]).unwrap()]).unwrap();
        let grid = GridSpec::uniform(&[(0.0, 1.0)], 2).unwrap();
        assert_eq!(tt.eval_continuous(&grid, &[0.25]).unwrap(), 0.5);
        assert!(tt.eval_continuous(&grid, &[1.25]).is_err());
    }

    #[test]
    fn eval_continuous_at_nodes_matches_discrete() {
        let tt = separable_2d();
        let grid = GridSpec::uniform(&[(0.0, 1.0), (0.0, 1.0)], 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let x = [i as f64, j as f64];
                assert_eq!(
                    tt.eval_continuous(&grid, &x).unwrap(),
                    tt.eval_discrete(&[i, j]).unwrap()
                );
            }
        }
    }

    #[test]
    fn bilinear_reproduces_affine() {
        // f(x, y) = x + y as a rank-2 TT on a 5x5 grid over [0, 1]^2:
        // slice_1(x) = [x, 1], slice_2(y) = [1, y]^T
        let grid = GridSpec::uniform(&[(0.0, 1.0), (0.0, 1.0)], 5).unwrap();
        let c1 = TtCore::from_fn(1, 5, 2, |_, i, b| {
            let x = grid.nodes(0)[i];
            if b == 0 {
                x
            } else {
                1.0
            }
        });
        let c2 = TtCore::from_fn(2, 5, 1, |a, i, _| {
            let y = grid.nodes(1)[i];
            if a == 0 {
                1.0
            } else {
                y
            }
        });
        let tt = TtTensor::new(vec![c1, c2]).unwrap();
        let pts = [
            (0.13, 0.77),
            (0.5, 0.5),
            (0.99, 0.01),
            (0.21, 0.34),
            (0.87, 0.66),
        ];
        for &(x, y) in &pts {
            let v = tt.eval_continuous(&grid, &[x, y]).unwrap();
            assert!((v - (x + y)).abs() < 1e-14, "{v} vs {}", x + y);
        }
    }

    #[test]
    fn full_tensor_d1_squeezes_core() {
        let tt = TtTensor::new(vec![TtCore::new(1, 3, 1, vec![5.0, 6.0, 7.0]).unwrap()]).unwrap();
        let dense = tt.full_tensor().unwrap();
        assert_eq!(dense.data(), &[5.0, 6.0, 7.0]);
    }

    #[test]
    fn full_tensor_rank1_outer_product() {
        let tt = separable_2d();
        let dense = tt.full_tensor().unwrap();
        assert_eq!(dense.get(&[0, 0]), 3.0);
        assert_eq!(dense.get(&[1, 0]), 6.0);
        assert_eq!(dense.get(&[0, 1]), 4.0);
        assert_eq!(dense.get(&[1, 1]), 8.0);
    }

    #[test]
    fn full_tensor_cap() {
        let cores = (0..4)
            .map(|_| TtCore::new(1, 10, 1, vec![1.0; 10]).unwrap())
            .collect();
        let tt = TtTensor::new(cores).unwrap();
        assert!(matches!(
            tt.full_tensor_with_cap(9_999),
            Err(TtError::DenseCapExceeded { .. })
        ));
        assert!(tt.full_tensor_with_cap(10_000).is_ok());
    }

    #[test]
    fn storage_size_examples() {
        // dims (10, 10, 10), ranks (1, 2, 2, 1)
        let c1 = TtCore::new(1, 10, 2, vec![0.0; 20]).unwrap();
        let c2 = TtCore::new(2, 10, 2, vec![0.0; 40]).unwrap();
        let c3 = TtCore::new(2, 10, 1, vec![0.0; 20]).unwrap();
        let tt = TtTensor::new(vec![c1, c2, c3]).unwrap();
        assert_eq!(tt.storage_size(), 80);

        // all ranks 1, d dims of size n: storage = d * n
        let cores = (0..6)
            .map(|_| TtCore::new(1, 4, 1, vec![0.0; 4]).unwrap())
            .collect();
        assert_eq!(TtTensor::new(cores).unwrap().storage_size(), 24);
    }

    #[test]
    fn rank_chain_validation() {
        let c1 = TtCore::new(1, 3, 2, vec![0.0; 6]).unwrap();
        let c2 = TtCore::new(3, 3, 1, vec![0.0; 9]).unwrap();
        assert!(TtTensor::new(vec![c1, c2]).is_err());
    }
}
