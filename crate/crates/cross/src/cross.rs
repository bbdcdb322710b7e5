use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ttrel_core::{GridSpec, TtCore, TtTensor};

use crate::{maxvol_with_options, pseudo_inverse, CrossError};

/// How the initial right index sets are chosen.
#[derive(Debug, Clone)]
pub enum CrossInit {
    /// Explicit per-interface suffix lists: `indices[k]` holds suffixes of
    /// length `d - 1 - k` for interface `k + 1` (`k` in `0..d-1`), each entry
    /// a multi-index over the trailing dimensions.
    Indices(Vec<Vec<Vec<usize>>>),
    /// Draw suffixes from uniformly random grid nodes with the given seed.
    /// Callers with a reference density map their own draws to nearest nodes
    /// and pass `Indices`.
    RandomNodes(u64),
}

#[derive(Debug, Clone)]
pub struct CrossConfig {
    /// Rank cap for every interface.
    pub max_rank: usize,
    /// Relative-change stopping tolerance, measured RMS over a fixed probe
    /// set of random multi-indices drawn once per build.
    pub tol: f64,
    /// Maximum number of full (forward + backward) sweeps.
    pub iter_max: usize,
    pub init: CrossInit,
    /// Cap on function evaluations; exceeding it aborts the build.
    pub budget: usize,
    pub probe_size: usize,
    /// Seed for the probe set (and init draws when `RandomNodes`).
    pub seed: u64,
    pub maxvol_tau: f64,
    pub maxvol_swap_cap: usize,
}

impl CrossConfig {
    pub fn new(max_rank: usize) -> Self {
        Self {
            max_rank,
            tol: 1e-12,
            iter_max: 1,
            init: CrossInit::RandomNodes(0),
            budget: usize::MAX,
            probe_size: 1000,
            seed: 0,
            maxvol_tau: crate::maxvol::DEFAULT_DOMINANCE_TOL,
            maxvol_swap_cap: crate::maxvol::DEFAULT_SWAP_CAP,
        }
    }

    fn validate(&self) -> Result<(), CrossError> {
        if self.max_rank == 0 {
            return Err(CrossError::InvalidConfig("max_rank must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(CrossError::InvalidConfig("tolerance must be positive".into()));
        }
        if self.iter_max == 0 {
            return Err(CrossError::InvalidConfig("iter_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Build diagnostics: evaluation accounting for the cost tables and the
/// stopping trace.
#[derive(Debug, Clone)]
pub struct CrossReport {
    pub iterations: usize,
    pub evals: u64,
    /// Relative change between the last two sweeps' approximations on the
    /// probe set; `None` when only one sweep ran.
    pub final_change: Option<f64>,
    /// Achieved interface ranks `r_0 .. r_d`.
    pub ranks: Vec<usize>,
    pub converged: bool,
    /// Count of maxvol calls that hit the swap cap.
    pub maxvol_warnings: usize,
}

struct Builder<'a, F: Fn(&[usize]) -> f64 + Sync> {
    f: &'a F,
    dims: Vec<usize>,
    cfg: &'a CrossConfig,
    ranks: Vec<usize>,
    left: Vec<Vec<Vec<usize>>>,
    right: Vec<Vec<Vec<usize>>>,
    evals: u64,
    maxvol_warnings: usize,
}

/// Cross approximation of `f` on the index grid (Algorithm: alternating
/// forward/backward maxvol sweeps over unfoldings, then core assembly from
/// the final index sets).
pub fn tt_cross<F>(
    f: F,
    grid: &GridSpec,
    cfg: &CrossConfig,
) -> Result<(TtTensor, CrossReport), CrossError>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    cfg.validate()?;
    let dims = grid.dims();
    let d = dims.len();

    let mut b = Builder {
        f: &f,
        dims: dims.clone(),
        cfg,
        ranks: initial_ranks(&dims, cfg.max_rank),
        left: vec![Vec::new(); d + 1],
        right: vec![Vec::new(); d + 1],
        evals: 0,
        maxvol_warnings: 0,
    };
    b.left[0] = vec![vec![]];
    b.right[d] = vec![vec![]];
    b.init_right_sets()?;

    if d == 1 {
        // Degenerate: a sampled univariate function, no sweeps needed.
        let idxs: Vec<Vec<usize>> = (0..dims[0]).map(|i| vec![i]).collect();
        let vals = b.eval_batch(&idxs)?;
        let tt = TtTensor::new(vec![TtCore::new(1, dims[0], 1, vals)?])?;
        let report = b.report(1, None, true);
        return Ok((tt, report));
    }

    let probes = b.draw_probes();
    let mut prev_probe_vals: Option<Vec<f64>> = None;
    let mut change: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;

    let tt = loop {
        iterations += 1;
        b.forward_sweep()?;
        let cached = b.backward_sweep()?;
        let tt = b.assemble(cached)?;

        let vals: Vec<f64> = probes
            .iter()
            .map(|p| tt.eval_discrete(p).expect("probe in range"))
            .collect();
        if let Some(prev) = &prev_probe_vals {
            let num: f64 = vals.iter().zip(prev).map(|(a, b)| (a - b) * (a - b)).sum();
            let den: f64 = vals.iter().map(|a| a * a).sum();
            let rel = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
            change = Some(rel);
            if rel <= cfg.tol {
                converged = true;
                break tt;
            }
        }
        prev_probe_vals = Some(vals);
        if iterations >= cfg.iter_max {
            break tt;
        }
    };

    // Achieved ranks come from the assembled tensor; boundary interfaces can
    // sit below the cap.
    b.ranks = tt.ranks().to_vec();
    debug_assert!(tt.max_rank() <= cfg.max_rank);
    let report = b.report(iterations, change, converged);
    Ok((tt, report))
}

fn initial_ranks(dims: &[usize], max_rank: usize) -> Vec<usize> {
    let d = dims.len();
    let mut ranks = vec![1usize; d + 1];
    for k in 1..d {
        let mut left: usize = 1;
        for &n in &dims[..k] {
            left = left.saturating_mul(n).min(1 << 30);
        }
        let mut right: usize = 1;
        for &n in &dims[k..] {
            right = right.saturating_mul(n).min(1 << 30);
        }
        ranks[k] = max_rank.min(left).min(right);
    }
    ranks
}

impl<F: Fn(&[usize]) -> f64 + Sync> Builder<'_, F> {
    fn report(&self, iterations: usize, final_change: Option<f64>, converged: bool) -> CrossReport {
        CrossReport {
            iterations,
            evals: self.evals,
            final_change,
            ranks: self.ranks.clone(),
            converged,
            maxvol_warnings: self.maxvol_warnings,
        }
    }

    fn draw_probes(&self) -> Vec<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_add(0x9E37_79B9_7F4A_7C15));
        (0..self.cfg.probe_size)
            .map(|_| self.dims.iter().map(|&n| rng.random_range(0..n)).collect())
            .collect()
    }

    fn init_right_sets(&mut self) -> Result<(), CrossError> {
        let d = self.dims.len();
        match &self.cfg.init {
            CrossInit::Indices(lists) => {
                if lists.len() != d - 1 {
                    return Err(CrossError::InvalidConfig(format!(
                        "need {} initial right index lists, got {}",
                        d - 1,
                        lists.len()
                    )));
                }
                for (k, list) in lists.iter().enumerate() {
                    let interface = k + 1;
                    if list.is_empty() || list.len() > self.cfg.max_rank {
                        return Err(CrossError::InvalidConfig(format!(
                            "initial right set {interface} has {} entries, want 1..={}",
                            list.len(),
                            self.cfg.max_rank
                        )));
                    }
                    let mut seen = std::collections::HashSet::new();
                    for suffix in list {
                        if suffix.len() != d - interface {
                            return Err(CrossError::InvalidConfig(format!(
                                "suffix length {} at interface {interface}, want {}",
                                suffix.len(),
                                d - interface
                            )));
                        }
                        for (j, &i) in suffix.iter().enumerate() {
                            if i >= self.dims[interface + j] {
                                return Err(CrossError::InvalidConfig(format!(
                                    "suffix index {i} out of range at interface {interface}"
                                )));
                            }
                        }
                        if !seen.insert(suffix.clone()) {
                            return Err(CrossError::InvalidConfig(format!(
                                "duplicate suffix at interface {interface}"
                            )));
                        }
                    }
                    self.right[interface] = list.clone();
                    self.ranks[interface] = self.ranks[interface].min(list.len());
                    // keep only as many suffixes as the rank allows
                    self.right[interface].truncate(self.ranks[interface]);
                }
            }
            CrossInit::RandomNodes(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed ^ self.cfg.seed);
                let samples: Vec<Vec<usize>> = (0..self.cfg.max_rank)
                    .map(|_| self.dims.iter().map(|&n| rng.random_range(0..n)).collect())
                    .collect();
                for interface in 1..d {
                    let want = self.ranks[interface];
                    let mut set: Vec<Vec<usize>> = Vec::with_capacity(want);
                    for s in &samples {
                        let suffix = s[interface..].to_vec();
                        if !set.contains(&suffix) {
                            set.push(suffix);
                        }
                        if set.len() == want {
                            break;
                        }
                    }
                    let mut attempts = 0;
                    while set.len() < want && attempts < 200 {
                        let suffix: Vec<usize> = (interface..d)
                            .map(|j| rng.random_range(0..self.dims[j]))
                            .collect();
                        if !set.contains(&suffix) {
                            set.push(suffix);
                        }
                        attempts += 1;
                    }
                    self.ranks[interface] = set.len().max(1);
                    set.truncate(self.ranks[interface]);
                    self.right[interface] = set;
                }
            }
        }
        Ok(())
    }

    fn eval_batch(&mut self, idxs: &[Vec<usize>]) -> Result<Vec<f64>, CrossError> {
        if self.evals.saturating_add(idxs.len() as u64) > self.cfg.budget as u64 {
            return Err(CrossError::BudgetExceeded {
                budget: self.cfg.budget,
                partial: self.report(0, None, false),
            });
        }
        let f = self.f;
        let vals: Vec<f64> = idxs.par_iter().with_min_len(32).map(|ix| f(ix)).collect();
        self.evals += idxs.len() as u64;
        for (ix, &v) in idxs.iter().zip(&vals) {
            if !v.is_finite() {
                return Err(CrossError::NonFinite { index: ix.clone(), value: v });
            }
        }
        Ok(vals)
    }

    /// Rows of the mode-`kk` unfolding: `left[kk]` crossed with every node,
    /// prefix-major.
    fn row_indices(&self, kk: usize) -> Vec<Vec<usize>> {
        let n = self.dims[kk];
        let mut rows = Vec::with_capacity(self.left[kk].len() * n);
        for prefix in &self.left[kk] {
            for i in 0..n {
                let mut ix = Vec::with_capacity(prefix.len() + 1);
                ix.extend_from_slice(prefix);
                ix.push(i);
                rows.push(ix);
            }
        }
        rows
    }

    fn unfold(&mut self, kk: usize) -> Result<(DMatrix<f64>, Vec<Vec<usize>>), CrossError> {
        let rows = self.row_indices(kk);
        let ncols = self.right[kk + 1].len();
        let mut idxs = Vec::with_capacity(rows.len() * ncols);
        for r in &rows {
            for c in &self.right[kk + 1] {
                let mut ix = Vec::with_capacity(self.dims.len());
                ix.extend_from_slice(r);
                ix.extend_from_slice(c);
                idxs.push(ix);
            }
        }
        let vals = self.eval_batch(&idxs)?;
        let m = DMatrix::from_fn(rows.len(), ncols, |i, j| vals[i * ncols + j]);
        Ok((m, rows))
    }

    fn maxvol_rows(&mut self, q: &DMatrix<f64>) -> Result<Vec<usize>, CrossError> {
        let res = maxvol_with_options(q, self.cfg.maxvol_tau, self.cfg.maxvol_swap_cap)?;
        if !res.converged {
            self.maxvol_warnings += 1;
        }
        Ok(res.indices)
    }

    fn forward_sweep(&mut self) -> Result<(), CrossError> {
        let d = self.dims.len();
        for kk in 0..d - 1 {
            let (m, rows) = self.unfold(kk)?;
            let want = self.ranks[kk + 1].min(m.ncols());
            let q = m.qr().q();
            let q = q.columns(0, want.min(q.ncols())).clone_owned();
            let picked = self.maxvol_rows(&q)?;
            self.left[kk + 1] = picked.iter().map(|&p| rows[p].clone()).collect();
            self.ranks[kk + 1] = self.left[kk + 1].len();
        }
        Ok(())
    }

    /// Runs the backward pass and returns the per-mode unfolding matrices,
    /// which double as the assembly evaluations (their index sets are final
    /// once the pass reaches them).
    fn backward_sweep(&mut self) -> Result<Vec<Option<DMatrix<f64>>>, CrossError> {
        let d = self.dims.len();
        let mut cache: Vec<Option<DMatrix<f64>>> = vec![None; d];
        for kk in (1..d).rev() {
            let (m, _) = self.unfold(kk)?;
            // transpose so maxvol selects columns (node, right-suffix pairs)
            let n = self.dims[kk];
            let rr = self.right[kk + 1].len();
            let mt = DMatrix::from_fn(n * rr, self.left[kk].len(), |col, a| {
                let (i, b) = (col / rr, col % rr);
                m[(a * n + i, b)]
            });
            let want = self.ranks[kk].min(mt.ncols());
            let q = mt.qr().q();
            let q = q.columns(0, want.min(q.ncols())).clone_owned();
            let picked = self.maxvol_rows(&q)?;
            self.right[kk] = picked
                .iter()
                .map(|&p| {
                    let (i, b) = (p / rr, p % rr);
                    let mut suffix = Vec::with_capacity(d - kk);
                    suffix.push(i);
                    suffix.extend_from_slice(&self.right[kk + 1][b]);
                    suffix
                })
                .collect();
            self.ranks[kk] = self.right[kk].len();
            cache[kk] = Some(m);
        }
        Ok(cache)
    }

    /// Cores from the final index sets: `core_k(i) = F_k(i) · pinv(A_hat)`
    /// with `A_hat` the intersection `f(left[k+1], right[k+1])`, which is a
    /// row subset of `F_k`. The last core is the raw unfolding.
    fn assemble(&mut self, cache: Vec<Option<DMatrix<f64>>>) -> Result<TtTensor, CrossError> {
        let d = self.dims.len();
        let mut cores = Vec::with_capacity(d);
        for kk in 0..d {
            let m = match cache.get(kk).and_then(|c| c.as_ref()) {
                Some(m) if self.unfold_matches(kk, m) => m.clone(),
                _ => self.unfold(kk)?.0,
            };
            let n = self.dims[kk];
            let rl = self.left[kk].len();
            let core_mat = if kk < d - 1 {
                // locate the intersection rows inside the unfolding
                let rows = self.row_indices(kk);
                let mut inter = DMatrix::zeros(self.left[kk + 1].len(), m.ncols());
                for (c, prefix) in self.left[kk + 1].iter().enumerate() {
                    let pos = rows
                        .iter()
                        .position(|r| r == prefix)
                        .expect("nested left sets live inside the unfolding rows");
                    inter.set_row(c, &m.row(pos));
                }
                let (pinv, _) = pseudo_inverse(&inter, crate::skeleton::PINV_DROP_TOL);
                &m * pinv
            } else {
                m
            };
            let rr = core_mat.ncols();
            let mut data = Vec::with_capacity(rl * n * rr);
            for a in 0..rl {
                for i in 0..n {
                    for b in 0..rr {
                        data.push(core_mat[(a * n + i, b)]);
                    }
                }
            }
            cores.push(TtCore::new(rl, n, rr, data)?);
        }
        Ok(TtTensor::new(cores)?)
    }

    fn unfold_matches(&self, kk: usize, m: &DMatrix<f64>) -> bool {
        m.nrows() == self.left[kk].len() * self.dims[kk]
            && m.ncols() == self.right[kk + 1].len()
    }
}
