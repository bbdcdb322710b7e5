use crate::TtError;

/// Per-dimension node sequences for discretizing functions on a
/// tensor-product grid. Nodes are strictly increasing; the first and last
/// node of each dimension are that dimension's bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    nodes: Vec<Vec<f64>>,
}

impl GridSpec {
    pub fn new(nodes: Vec<Vec<f64>>) -> Result<Self, TtError> {
        if nodes.is_empty() {
            return Err(TtError::InvalidGrid("grid needs at least one dimension".into()));
        }
        for (k, ns) in nodes.iter().enumerate() {
            if ns.len() < 2 {
                return Err(TtError::InvalidGrid(format!(
                    "dimension {k} has {} nodes, need at least 2",
                    ns.len()
                )));
            }
            if !ns.iter().all(|v| v.is_finite()) {
                return Err(TtError::InvalidGrid(format!("dimension {k} has non-finite nodes")));
            }
            if ns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(TtError::InvalidGrid(format!(
                    "dimension {k} nodes are not strictly increasing"
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// Uniform grid with `n` nodes per dimension over per-dimension bounds.
    pub fn uniform(bounds: &[(f64, f64)], n: usize) -> Result<Self, TtError> {
        let nodes = bounds
            .iter()
            .map(|&(lo, hi)| {
                (0..n)
                    .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                    .collect()
            })
            .collect();
        Self::new(nodes)
    }

    pub fn ndim(&self) -> usize {
        self.nodes.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.nodes.iter().map(|ns| ns.len()).collect()
    }

    pub fn nodes(&self, dim: usize) -> &[f64] {
        &self.nodes[dim]
    }

    pub fn bounds(&self, dim: usize) -> (f64, f64) {
        let ns = &self.nodes[dim];
        (ns[0], ns[ns.len() - 1])
    }

    /// Maps a coordinate to `(cell, t)` with `t` in `[0, 1]` the local
    /// position between nodes `cell` and `cell + 1`. No extrapolation.
    pub fn locate(&self, dim: usize, x: f64) -> Result<(usize, f64), TtError> {
        let ns = &self.nodes[dim];
        let (lo, hi) = self.bounds(dim);
        if !(x >= lo && x <= hi) {
            return Err(TtError::OutOfBounds { dim, value: x, lo, hi });
        }
        if x >= ns[ns.len() - 1] {
            return Ok((ns.len() - 2, 1.0));
        }
        // partition_point: first node strictly greater than x
        let j = ns.partition_point(|&v| v <= x);
        let cell = j - 1;
        let t = (x - ns[cell]) / (ns[cell + 1] - ns[cell]);
        Ok((cell, t))
    }

    /// Index of the node closest to `x` (clamped to the bounds).
    pub fn nearest_node(&self, dim: usize, x: f64) -> usize {
        let ns = &self.nodes[dim];
        let x = x.clamp(ns[0], ns[ns.len() - 1]);
        let (cell, t) = self.locate(dim, x).expect("clamped coordinate is in bounds");
        if t < 0.5 {
            cell
        } else {
            cell + 1
        }
    }

    /// Checks node counts against a TT tensor's mode sizes.
    pub fn matches_dims(&self, dims: &[usize]) -> bool {
        self.dims() == dims
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_hits_bounds() {
        let g = GridSpec::uniform(&[(-1.0, 1.0), (0.0, 4.0)], 5).unwrap();
        assert_eq!(g.bounds(0), (-1.0, 1.0));
        assert_eq!(g.bounds(1), (0.0, 4.0));
        assert_eq!(g.nodes(1), &[0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn locate_interior_and_edges() {
        let g = GridSpec::uniform(&[(0.0, 1.0)], 5).unwrap();
        assert_eq!(g.locate(0, 0.0).unwrap(), (0, 0.0));
        assert_eq!(g.locate(0, 1.0).unwrap(), (3, 1.0));
        let (cell, t) = g.locate(0, 0.3).unwrap();
        assert_eq!(cell, 1);
        assert!((t - 0.2).abs() < 1e-12);
        assert!(g.locate(0, 1.0001).is_err());
        assert!(g.locate(0, -0.0001).is_err());
    }

    #[test]
    fn nearest_node_rounds() {
        let g = GridSpec::uniform(&[(0.0, 1.0)], 5).unwrap();
        assert_eq!(g.nearest_node(0, 0.3), 1);
        assert_eq!(g.nearest_node(0, 0.4), 2);
        assert_eq!(g.nearest_node(0, 7.0), 4);
        assert_eq!(g.nearest_node(0, -7.0), 0);
    }

    #[test]
    fn rejects_non_monotone_nodes() {
        assert!(GridSpec::new(vec![vec![0.0, 0.0, 1.0]]).is_err());
        assert!(GridSpec::new(vec![vec![0.0]]).is_err());
    }
}
