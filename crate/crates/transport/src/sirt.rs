use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ttrel_core::{GridSpec, TtTensor};
use ttrel_cross::{tt_cross, CrossConfig, CrossError, CrossReport};

use crate::{ReferenceDensity, TransportError};

/// Relative density floor mixed into the squared representation so
/// conditionals stay strictly positive where the TT value is ~0.
pub const DEFAULT_FLOOR_REL: f64 = 1e-30;
/// Absolute tolerance on CDF values for the one-dimensional inversions.
const CDF_TOL: f64 = 1e-10;

/// Defensive component: a fixed fraction of the layer mass follows the
/// product reference density. This bounds the reference-to-layer density
/// ratio, which otherwise blows up the composite Jacobian wherever the
/// squared TT is near zero and derails every later layer build.
#[derive(Debug, Clone)]
struct DefensivePart {
    /// Unnormalized weight; the defensive mass fraction is
    /// `weight / (norm_tt + weight)`.
    weight: f64,
    reference: ReferenceDensity,
    /// Reference CDF at the grid nodes, per dimension.
    node_cdf: Vec<Vec<f64>>,
}

/// One triangular transport layer. The stored TT approximates the square
/// root of an unnormalized density on the grid box; the layer density is
/// `(tt(x)^2 + eps + eta * rho(x)) / C` with `rho` the product reference
/// density, normalized exactly (closed-form quadrature of the squared
/// piecewise-linear cores plus analytic reference terms). Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct SirtLayer {
    tt: TtTensor,
    grid: GridSpec,
    /// Per dimension `k`, per node `i`: slice `A_i · L_{k+1}` flattened as
    /// `(i * rl + a) * rr + b`, where `L_{k+1} L_{k+1}^T` is the Gram
    /// accumulator over trailing dimensions.
    atl: Vec<Vec<f64>>,
    floor_eps: f64,
    /// `suffix_vol[k] = prod_{j >= k} (b_j - a_j)`, `suffix_vol[d] = 1`.
    suffix_vol: Vec<f64>,
    defensive: Option<DefensivePart>,
    norm_raw: f64,
    norm: f64,
}

/// Reusable scratch for the per-coordinate conditional machinery.
#[derive(Debug, Default, Clone)]
pub struct SirtWorkspace {
    ell: Vec<f64>,
    p: Vec<f64>,
    c: Vec<f64>,
    cum: Vec<f64>,
    pub(crate) v: Vec<f64>,
    vnext: Vec<f64>,
    /// Product of reference densities along the prefix.
    r_prefix: f64,
    // per-conditional floors, filled by `prepare`
    floor_flat: f64,
    floor_def: f64,
}

impl SirtWorkspace {
    fn reset_prefix(&mut self) {
        self.v.clear();
        self.v.push(1.0);
        self.r_prefix = 1.0;
    }
}

impl SirtLayer {
    /// Wraps an already-built square-root TT; the floor is calibrated from
    /// a probe set of grid values.
    pub fn from_tt(
        tt: TtTensor,
        grid: GridSpec,
        floor_rel: f64,
        probe_seed: u64,
    ) -> Result<Self, TransportError> {
        let mut rng = ChaCha8Rng::seed_from_u64(probe_seed ^ 0xA5A5_5A5A_DEAD_BEEF);
        let dims = tt.dims().to_vec();
        let mut max_sq: f64 = 0.0;
        for _ in 0..1000 {
            let idx: Vec<usize> = dims.iter().map(|&n| rng.random_range(0..n)).collect();
            let v = tt.eval_discrete(&idx)?;
            max_sq = max_sq.max(v * v);
        }
        let eps = (floor_rel * max_sq).max(1e-300);
        Self::from_tt_with_floors(tt, grid, eps, 0.0, None)
    }

    /// Full constructor: explicit flat floor `eps` and defensive weight
    /// `eta` (unnormalized mass of the reference component).
    pub fn from_tt_with_floors(
        tt: TtTensor,
        grid: GridSpec,
        floor_eps: f64,
        eta: f64,
        reference: Option<&ReferenceDensity>,
    ) -> Result<Self, TransportError> {
        if !grid.matches_dims(tt.dims()) {
            return Err(TransportError::Domain("grid does not match tensor dims".into()));
        }
        if !(floor_eps > 0.0) {
            return Err(TransportError::Domain("floor must be positive".into()));
        }
        if eta > 0.0 && reference.is_none() {
            return Err(TransportError::Domain(
                "defensive weight needs a reference density".into(),
            ));
        }
        let d = tt.ndim();

        let mut suffix_vol = vec![1.0; d + 1];
        for k in (0..d).rev() {
            let (a, b) = grid.bounds(k);
            suffix_vol[k] = suffix_vol[k + 1] * (b - a);
        }

        // Right-to-left Gram accumulators of the squared representation:
        // G_k = integral over trailing coords of core chains times their
        // transposes; exact for piecewise-linear cores (quadratic cells).
        let mut atl: Vec<Vec<f64>> = vec![Vec::new(); d];
        let mut gram = DMatrix::<f64>::from_element(1, 1, 1.0);
        for k in (0..d).rev() {
            let core = tt.core(k);
            let (rl, n, rr) = (core.left_rank(), core.n(), core.right_rank());
            let nodes = grid.nodes(k);
            let slices: Vec<DMatrix<f64>> = (0..n)
                .map(|i| DMatrix::from_fn(rl, rr, |a, b| core.get(a, i, b)))
                .collect();

            // factor the current (trailing) Gram for this dimension's
            // conditional machinery
            let l_fac = psd_factor(&gram);
            let mut flat = vec![0.0; n * rl * rr];
            for (i, s) in slices.iter().enumerate() {
                let prod = s * &l_fac;
                for a in 0..rl {
                    for b in 0..rr {
                        flat[(i * rl + a) * rr + b] = prod[(a, b)];
                    }
                }
            }
            atl[k] = flat;

            let m_slices: Vec<DMatrix<f64>> = slices.iter().map(|s| s * &gram).collect();
            let mut g_new = DMatrix::<f64>::zeros(rl, rl);
            for i in 0..n - 1 {
                let h = nodes[i + 1] - nodes[i];
                let self_part = &m_slices[i] * slices[i].transpose()
                    + &m_slices[i + 1] * slices[i + 1].transpose();
                let cross_part = &m_slices[i] * slices[i + 1].transpose()
                    + &m_slices[i + 1] * slices[i].transpose();
                g_new += h * (self_part / 3.0 + cross_part / 6.0);
            }
            // kill asymmetric rounding drift
            g_new = (&g_new + g_new.transpose()) * 0.5;
            gram = g_new;
        }
        debug_assert_eq!(gram.nrows(), 1);
        let norm_raw = gram[(0, 0)].max(0.0);
        let norm = norm_raw + floor_eps * suffix_vol[0] + eta;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(TransportError::NonPositiveNorm);
        }
        let defensive = if eta > 0.0 {
            let reference = reference.expect("checked above").clone();
            let node_cdf = (0..d)
                .map(|k| grid.nodes(k).iter().map(|&x| reference.cdf(x)).collect())
                .collect();
            Some(DefensivePart { weight: eta, reference, node_cdf })
        } else {
            None
        };
        Ok(Self { tt, grid, atl, floor_eps, suffix_vol, defensive, norm_raw, norm })
    }

    /// Adds a defensive reference component carrying fraction `tau` of the
    /// layer mass.
    pub fn with_defensive(
        self,
        reference: &ReferenceDensity,
        tau: f64,
    ) -> Result<Self, TransportError> {
        if !(tau >= 0.0 && tau < 1.0) {
            return Err(TransportError::Domain(format!(
                "defensive fraction {tau} must be in [0, 1)"
            )));
        }
        if tau == 0.0 {
            return Ok(self);
        }
        let base = self.norm_raw + self.floor_eps * self.suffix_vol[0];
        let eta = tau / (1.0 - tau) * base;
        Self::from_tt_with_floors(self.tt, self.grid, self.floor_eps, eta, Some(reference))
    }

    pub fn ndim(&self) -> usize {
        self.tt.ndim()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn tt(&self) -> &TtTensor {
        &self.tt
    }

    pub fn floor_eps(&self) -> f64 {
        self.floor_eps
    }

    /// Unnormalized weight of the defensive reference component.
    pub fn defensive_eta(&self) -> f64 {
        self.defensive.as_ref().map(|p| p.weight).unwrap_or(0.0)
    }

    /// Normalization constant of the squared TT before floors are mixed in.
    pub fn norm_raw(&self) -> f64 {
        self.norm_raw
    }

    pub fn workspace(&self) -> SirtWorkspace {
        let n_max = self.tt.dims().iter().copied().max().unwrap_or(2);
        let r_max = self.tt.max_rank();
        SirtWorkspace {
            ell: vec![0.0; n_max * r_max],
            p: vec![0.0; n_max],
            c: vec![0.0; n_max],
            cum: vec![0.0; n_max],
            v: vec![1.0],
            vnext: vec![0.0; r_max],
            r_prefix: 1.0,
            floor_flat: 0.0,
            floor_def: 0.0,
        }
    }

    /// Normalized layer density at a point of the box.
    pub fn density(&self, x: &[f64]) -> Result<f64, TransportError> {
        let t = self.tt.eval_continuous(&self.grid, x)?;
        let mut num = t * t + self.floor_eps;
        if let Some(def) = &self.defensive {
            let rho: f64 = x.iter().map(|&v| def.reference.pdf(v)).product();
            num += def.weight * rho;
        }
        Ok(num / self.norm)
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64, TransportError> {
        Ok(self.density(x)?.ln())
    }

    /// Fills the workspace with the conditional along dimension `k` given
    /// the current prefix chain; returns the conditional's total
    /// (unnormalized) mass.
    fn prepare(&self, k: usize, ws: &mut SirtWorkspace) -> f64 {
        let core = self.tt.core(k);
        let (rl, n, rr) = (core.left_rank(), core.n(), core.right_rank());
        debug_assert_eq!(ws.v.len(), rl);
        let atl = &self.atl[k];
        let nodes = self.grid.nodes(k);
        ws.floor_flat = self.floor_eps * self.suffix_vol[k + 1];
        ws.floor_def = self
            .defensive
            .as_ref()
            .map(|d| d.weight * ws.r_prefix)
            .unwrap_or(0.0);

        ws.ell.resize(n * rr, 0.0);
        ws.p.resize(n, 0.0);
        ws.c.resize(n, 0.0);
        ws.cum.resize(n, 0.0);

        for i in 0..n {
            let out = &mut ws.ell[i * rr..(i + 1) * rr];
            out.fill(0.0);
            for (a, &va) in ws.v.iter().enumerate() {
                if va == 0.0 {
                    continue;
                }
                let row = (i * rl + a) * rr;
                for (b, o) in out.iter_mut().enumerate() {
                    *o += va * atl[row + b];
                }
            }
        }
        for i in 0..n {
            let e = &ws.ell[i * rr..(i + 1) * rr];
            ws.p[i] = e.iter().map(|v| v * v).sum();
        }
        for i in 0..n - 1 {
            let a = &ws.ell[i * rr..(i + 1) * rr];
            let b = &ws.ell[(i + 1) * rr..(i + 2) * rr];
            ws.c[i] = a.iter().zip(b).map(|(x, y)| x * y).sum();
        }
        ws.cum[0] = 0.0;
        for i in 0..n - 1 {
            let h = nodes[i + 1] - nodes[i];
            let mut mass = h * ((ws.p[i] + ws.p[i + 1] + ws.c[i]) / 3.0 + ws.floor_flat);
            if let Some(def) = &self.defensive {
                mass += ws.floor_def * (def.node_cdf[k][i + 1] - def.node_cdf[k][i]);
            }
            ws.cum[i + 1] = ws.cum[i] + mass;
        }
        ws.cum[n - 1]
    }

    /// Partial cell integral of the conditional from the left cell edge to
    /// local coordinate `t`, in x-units.
    #[inline]
    fn cell_partial(&self, ws: &SirtWorkspace, k: usize, cell: usize, t: f64) -> f64 {
        let nodes = self.grid.nodes(k);
        let h = nodes[cell + 1] - nodes[cell];
        let (pi, pj, ci) = (ws.p[cell], ws.p[cell + 1], ws.c[cell]);
        let omt = 1.0 - t;
        let mut s = h
            * (pi * (1.0 - omt * omt * omt) / 3.0 + ci * (t * t - 2.0 * t * t * t / 3.0)
                + pj * t * t * t / 3.0
                + ws.floor_flat * t);
        if let Some(def) = &self.defensive {
            if ws.floor_def > 0.0 {
                let x = nodes[cell] + t * h;
                s += ws.floor_def * (def.reference.cdf(x) - def.node_cdf[k][cell]);
            }
        }
        s
    }

    /// Conditional density value at local coordinate `t` of `cell` (x-units,
    /// unnormalized).
    #[inline]
    fn cell_density(&self, ws: &SirtWorkspace, k: usize, cell: usize, t: f64) -> f64 {
        let (pi, pj, ci) = (ws.p[cell], ws.p[cell + 1], ws.c[cell]);
        let omt = 1.0 - t;
        let mut q = (omt * omt * pi + 2.0 * t * omt * ci + t * t * pj).max(0.0) + ws.floor_flat;
        if let Some(def) = &self.defensive {
            if ws.floor_def > 0.0 {
                let nodes = self.grid.nodes(k);
                let x = nodes[cell] + t * (nodes[cell + 1] - nodes[cell]);
                q += ws.floor_def * def.reference.pdf(x);
            }
        }
        q
    }

    /// CDF of the conditional at `x`, exactly 0/1 at the box edges.
    fn cdf_in(&self, k: usize, x: f64, ws: &SirtWorkspace, total: f64) -> Result<f64, TransportError> {
        let (cell, t) = self.grid.locate(k, x)?;
        Ok(((ws.cum[cell] + self.cell_partial(ws, k, cell, t)) / total).clamp(0.0, 1.0))
    }

    /// Inverts the conditional CDF at `u` in `[0, 1]`; returns the
    /// coordinate, its cell and local position, and the normalized
    /// conditional density there.
    fn invert_in(
        &self,
        k: usize,
        u: f64,
        ws: &SirtWorkspace,
        total: f64,
    ) -> (f64, usize, f64, f64) {
        let nodes = self.grid.nodes(k);
        let n = nodes.len();
        let target = u * total;
        // first cell whose right cumulative reaches the target
        let mut cell = ws.cum[1..n].partition_point(|&cm| cm < target);
        if cell >= n - 1 {
            cell = n - 2;
        }
        let local = target - ws.cum[cell];
        let mass = ws.cum[cell + 1] - ws.cum[cell];
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut t = (local / mass).clamp(0.0, 1.0);
        if !t.is_finite() {
            t = 0.5;
        }
        for _ in 0..100 {
            let s = self.cell_partial(ws, k, cell, t);
            let err = s - local;
            if err.abs() <= CDF_TOL * total {
                break;
            }
            if err > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let h = nodes[cell + 1] - nodes[cell];
            let deriv = h * self.cell_density(ws, k, cell, t);
            let newton = t - err / deriv;
            t = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        let h = nodes[cell + 1] - nodes[cell];
        let x = nodes[cell] + t * h;
        let dens = self.cell_density(ws, k, cell, t) / total;
        (x, cell, t, dens)
    }

    fn advance_prefix(&self, k: usize, cell: usize, t: f64, x: f64, ws: &mut SirtWorkspace) {
        let core = self.tt.core(k);
        ws.vnext.resize(core.right_rank(), 0.0);
        core.apply_interp(cell, t, &ws.v, &mut ws.vnext);
        std::mem::swap(&mut ws.v, &mut ws.vnext);
        if let Some(def) = &self.defensive {
            ws.r_prefix *= def.reference.pdf(x);
        }
    }

    /// Conditional CDF `F(x_k | x_{<k})` of the layer density.
    pub fn conditional_cdf(&self, k: usize, prefix: &[f64], x: f64) -> Result<f64, TransportError> {
        if k >= self.ndim() || prefix.len() != k {
            return Err(TransportError::Domain(format!(
                "conditional at dimension {k} needs a prefix of length {k}"
            )));
        }
        let mut ws = self.workspace();
        ws.reset_prefix();
        for (j, &xj) in prefix.iter().enumerate() {
            let (cell, t) = self.grid.locate(j, xj)?;
            self.advance_prefix(j, cell, t, xj, &mut ws);
        }
        let total = self.prepare(k, &mut ws);
        self.cdf_in(k, x, &ws, total)
    }

    /// Sequential inverse-Rosenblatt map: solves
    /// `F(x_k | x_{<k}) = u_k` for `k = 1..d`. Returns the point and the
    /// normalized layer density there. `u` must be strictly interior.
    pub fn irt_invert(&self, u: &[f64]) -> Result<(Vec<f64>, f64), TransportError> {
        for &uk in u {
            if !(uk > 0.0 && uk < 1.0) {
                return Err(TransportError::BoundaryU(uk));
            }
        }
        let mut ws = self.workspace();
        let (x, log_dens) = self.invert_01(u, &mut ws)?;
        Ok((x, log_dens.exp()))
    }

    /// Interior-or-boundary inversion used by the composite map; returns the
    /// point and the log layer density.
    pub(crate) fn invert_01(
        &self,
        u: &[f64],
        ws: &mut SirtWorkspace,
    ) -> Result<(Vec<f64>, f64), TransportError> {
        if u.len() != self.ndim() {
            return Err(TransportError::Domain("wrong coordinate count".into()));
        }
        ws.reset_prefix();
        let mut x = Vec::with_capacity(u.len());
        let mut log_dens = 0.0;
        for (k, &uk) in u.iter().enumerate() {
            let total = self.prepare(k, ws);
            let (xk, cell, t, dens) = self.invert_in(k, uk.clamp(0.0, 1.0), ws, total);
            x.push(xk);
            log_dens += dens.ln();
            self.advance_prefix(k, cell, t, xk, ws);
        }
        Ok((x, log_dens))
    }

    /// Forward Rosenblatt map `u_k = F(x_k | x_{<k})`.
    pub fn rosenblatt_forward(&self, x: &[f64]) -> Result<Vec<f64>, TransportError> {
        let mut ws = self.workspace();
        self.forward_01(x, &mut ws).map(|(u, _)| u)
    }

    /// Forward map returning the log layer density along the way.
    pub(crate) fn forward_01(
        &self,
        x: &[f64],
        ws: &mut SirtWorkspace,
    ) -> Result<(Vec<f64>, f64), TransportError> {
        if x.len() != self.ndim() {
            return Err(TransportError::Domain("wrong coordinate count".into()));
        }
        ws.reset_prefix();
        let mut u = Vec::with_capacity(x.len());
        let mut log_dens = 0.0;
        for (k, &xk) in x.iter().enumerate() {
            let total = self.prepare(k, ws);
            let (cell, t) = self.grid.locate(k, xk)?;
            u.push(((ws.cum[cell] + self.cell_partial(ws, k, cell, t)) / total).clamp(0.0, 1.0));
            log_dens += (self.cell_density(ws, k, cell, t) / total).ln();
            self.advance_prefix(k, cell, t, xk, ws);
        }
        Ok((u, log_dens))
    }
}

fn psd_factor(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = g.clone().symmetric_eigen();
    let n = g.nrows();
    let mut l = eig.eigenvectors;
    for j in 0..n {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..n {
            l[(i, j)] *= s;
        }
    }
    l
}

/// Builds a layer by cross-approximating the square root of a strictly
/// positive ratio sampled at grid nodes.
pub fn build_sirt_layer<F>(
    target_ratio: F,
    grid: &GridSpec,
    cross_cfg: &CrossConfig,
    floor_rel: f64,
) -> Result<(SirtLayer, CrossReport), TransportError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let nodes_of = |idx: &[usize]| -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| grid.nodes(k)[i])
            .collect()
    };
    let f = |idx: &[usize]| target_ratio(&nodes_of(idx)).sqrt();
    let (tt, report) = tt_cross(f, grid, cross_cfg).map_err(|e| match e {
        CrossError::NonFinite { index, value } => TransportError::Domain(format!(
            "target ratio not positive and finite at grid index {index:?} (sqrt gave {value})"
        )),
        other => TransportError::Cross(other),
    })?;
    let layer = SirtLayer::from_tt(tt, grid.clone(), floor_rel, cross_cfg.seed)?;
    Ok((layer, report))
}

/// Log-space variant: cross-approximates `exp((log_target - shift) / 2)`,
/// which keeps tempered targets from underflowing.
pub fn build_sirt_layer_from_log<F>(
    log_target: F,
    shift: f64,
    grid: &GridSpec,
    cross_cfg: &CrossConfig,
    floor_rel: f64,
) -> Result<(SirtLayer, CrossReport), TransportError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let nodes_of = |idx: &[usize]| -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| grid.nodes(k)[i])
            .collect()
    };
    let f = |idx: &[usize]| {
        let lt = log_target(&nodes_of(idx));
        (0.5 * (lt - shift)).exp()
    };
    let (tt, report) = tt_cross(f, grid, cross_cfg)?;
    let layer = SirtLayer::from_tt(tt, grid.clone(), floor_rel, cross_cfg.seed)?;
    Ok((layer, report))
}
