use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ttrel_core::GridSpec;
use ttrel_cross::{CrossConfig, CrossInit, CrossReport};

use crate::sirt::{build_sirt_layer_from_log, SirtLayer, DEFAULT_FLOOR_REL};
use crate::{ReferenceDensity, TemperingSchedule, TransportError};

#[derive(Debug, Clone)]
pub struct DirtConfig {
    /// Uniform grid nodes per dimension on the reference box.
    pub grid_nodes: usize,
    /// TT rank cap for every layer.
    pub max_rank: usize,
    /// Cross sweep count and stopping tolerance per layer.
    pub cross_iter_max: usize,
    pub cross_tol: f64,
    /// Reference draws used to center each layer's log-target before
    /// exponentiation.
    pub pilot_size: usize,
    pub seed: u64,
    pub floor_rel: f64,
    /// Mass fraction of each layer following the reference density. Bounds
    /// the per-layer Jacobian of the composite, so one poorly approximated
    /// region cannot blow up the next layer's cross target.
    pub defensive_tau: f64,
    /// Cap on target evaluations across the whole build.
    pub budget: usize,
}

impl Default for DirtConfig {
    fn default() -> Self {
        Self {
            grid_nodes: 33,
            max_rank: 4,
            cross_iter_max: 1,
            cross_tol: 1e-12,
            pilot_size: 100,
            seed: 0,
            floor_rel: DEFAULT_FLOOR_REL,
            defensive_tau: 0.01,
            budget: usize::MAX,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DirtBuildReport {
    pub per_layer: Vec<CrossReport>,
    /// Target evaluations including the pilot probes.
    pub target_evals: u64,
}

impl DirtBuildReport {
    pub fn max_rank(&self) -> usize {
        self.per_layer
            .iter()
            .flat_map(|r| r.ranks.iter().copied())
            .max()
            .unwrap_or(1)
    }
}

/// Composite transport: an ordered stack of triangular layers over a
/// tempering schedule, plus the affine scaling between the reference box
/// and the physical box. Maps reference samples to (approximate) target
/// samples with an exactly computable pushforward density.
#[derive(Debug, Clone)]
pub struct DirtMap {
    layers: Vec<SirtLayer>,
    schedule: TemperingSchedule,
    reference: ReferenceDensity,
    /// Physical bounds per dimension.
    scaling: Vec<(f64, f64)>,
    log_scale_jac: f64,
    pub build_report: DirtBuildReport,
}

impl DirtMap {
    pub fn dim(&self) -> usize {
        self.scaling.len()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[SirtLayer] {
        &self.layers
    }

    pub fn schedule(&self) -> &TemperingSchedule {
        &self.schedule
    }

    pub fn reference(&self) -> &ReferenceDensity {
        &self.reference
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.scaling
    }

    pub(crate) fn assemble(
        layers: Vec<SirtLayer>,
        schedule: TemperingSchedule,
        reference: ReferenceDensity,
        scaling: Vec<(f64, f64)>,
        build_report: DirtBuildReport,
    ) -> Self {
        let width = reference.hi - reference.lo;
        let log_scale_jac = scaling
            .iter()
            .map(|&(a, b)| ((b - a) / width).ln())
            .sum();
        Self { layers, schedule, reference, scaling, log_scale_jac, build_report }
    }

    fn scale_to_physical(&self, v: &[f64]) -> Vec<f64> {
        let width = self.reference.hi - self.reference.lo;
        v.iter()
            .zip(&self.scaling)
            .map(|(&z, &(a, b))| a + (z - self.reference.lo) / width * (b - a))
            .collect()
    }

    fn scale_to_reference(&self, x: &[f64]) -> Result<Vec<f64>, TransportError> {
        let width = self.reference.hi - self.reference.lo;
        x.iter()
            .zip(&self.scaling)
            .map(|(&xv, &(a, b))| {
                if !(xv >= a && xv <= b) {
                    return Err(TransportError::Domain(format!(
                        "{xv} outside physical bounds [{a}, {b}]"
                    )));
                }
                Ok(self.reference.lo + (xv - a) / (b - a) * width)
            })
            .collect()
    }

    /// Pushes a reference-box point through the innermost `n_layers` layers
    /// and the physical scaling. Returns the physical point and
    /// `log |Jac T|` accumulated along the way.
    pub(crate) fn push_partial(
        &self,
        v: &[f64],
        n_layers: usize,
    ) -> Result<(Vec<f64>, f64), TransportError> {
        let mut z = v.to_vec();
        let mut log_jac = self.log_scale_jac;
        for layer in self.layers[..n_layers].iter().rev() {
            let mut ws = layer.workspace();
            let u: Vec<f64> = z.iter().map(|&zk| self.reference.cdf(zk)).collect();
            let log_rho = self.reference.ln_pdf_vec(&z);
            let (x, log_dens) = layer.invert_01(&u, &mut ws)?;
            log_jac += log_rho - log_dens;
            z = x;
        }
        Ok((self.scale_to_physical(&z), log_jac))
    }

    /// Transports a reference sample to physical coordinates; returns the
    /// point and the log pushforward density of the composite map there.
    pub fn sample(&self, u: &[f64]) -> Result<(Vec<f64>, f64), TransportError> {
        if u.len() != self.dim() {
            return Err(TransportError::Domain("wrong coordinate count".into()));
        }
        let log_rho = self.reference.ln_pdf_vec(u);
        let (x, log_jac) = self.push_partial(u, self.layers.len())?;
        Ok((x, log_rho - log_jac))
    }

    /// Draws a fresh reference sample.
    pub fn sample_reference(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.reference.sample_vec(self.dim(), rng)
    }

    /// Inverse of [`DirtMap::sample`]'s point map: physical point back to
    /// the reference box.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, TransportError> {
        Ok(self.forward_with_density(x)?.0)
    }

    /// Forward map plus the log pushforward density at `x`.
    pub fn forward_with_density(&self, x: &[f64]) -> Result<(Vec<f64>, f64), TransportError> {
        let mut z = self.scale_to_reference(x)?;
        let mut log_jac = self.log_scale_jac;
        for layer in &self.layers {
            let mut ws = layer.workspace();
            let (u, log_dens) = layer.forward_01(&z, &mut ws)?;
            let next: Vec<f64> = u.iter().map(|&uk| self.reference.quantile(uk)).collect();
            log_jac += self.reference.ln_pdf_vec(&next) - log_dens;
            z = next;
        }
        let log_density = self.reference.ln_pdf_vec(&z) - log_jac;
        Ok((z, log_density))
    }

    /// Log pushforward density of the composite map at a physical point.
    pub fn log_pushforward_density(&self, x: &[f64]) -> Result<f64, TransportError> {
        Ok(self.forward_with_density(x)?.1)
    }
}

/// Builds a multilayer transport for the unnormalized physical log-target.
/// Layer `l` cross-approximates the square root of
/// `beta_l * log_target(T(v)) + log |Jac T(v)|` in reference coordinates,
/// where `T` is the composite of the layers built so far.
pub fn dirt_build<F>(
    bounds: &[(f64, f64)],
    log_target: F,
    schedule: &TemperingSchedule,
    reference: &ReferenceDensity,
    cfg: &DirtConfig,
) -> Result<DirtMap, TransportError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = bounds.len();
    if d == 0 {
        return Err(TransportError::Domain("need at least one dimension".into()));
    }
    for &(a, b) in bounds {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(TransportError::Domain(format!("bad physical bounds [{a}, {b}]")));
        }
    }
    let grid = GridSpec::uniform(&vec![(reference.lo, reference.hi); d], cfg.grid_nodes)?;

    let mut map = DirtMap::assemble(
        Vec::new(),
        schedule.clone(),
        reference.clone(),
        bounds.to_vec(),
        DirtBuildReport { per_layer: Vec::new(), target_evals: 0 },
    );
    let mut evals: u64 = 0;

    for (l, &beta) in schedule.betas().iter().enumerate() {
        let log_ratio = |v: &[f64]| -> f64 {
            match map.push_partial(v, l) {
                Ok((x, log_jac)) => beta * log_target(&x) + log_jac,
                Err(_) => f64::NEG_INFINITY,
            }
        };

        // center the exponent so the square root neither under- nor
        // overflows across the box
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0xD1A7 + l as u64));
        let mut shift = f64::NEG_INFINITY;
        for _ in 0..cfg.pilot_size {
            let v = reference.sample_vec(d, &mut rng);
            shift = shift.max(log_ratio(&v));
        }
        evals += cfg.pilot_size as u64;
        if !shift.is_finite() {
            return Err(TransportError::LayerBuild {
                layer: l,
                built: map.layers.len(),
                source: Box::new(TransportError::Domain(
                    "log target is -inf on the whole pilot set".into(),
                )),
            });
        }

        let init = draw_init_indices(&grid, reference, cfg.max_rank, cfg.seed ^ (31 + l as u64));
        let mut cross_cfg = CrossConfig::new(cfg.max_rank);
        cross_cfg.iter_max = cfg.cross_iter_max;
        cross_cfg.tol = cfg.cross_tol;
        cross_cfg.seed = cfg.seed ^ (0xC0_55 + l as u64);
        cross_cfg.init = CrossInit::Indices(init);
        cross_cfg.budget = cfg.budget.saturating_sub(evals as usize);

        let (layer, report) =
            build_sirt_layer_from_log(&log_ratio, shift, &grid, &cross_cfg, cfg.floor_rel)
                .map_err(|e| TransportError::LayerBuild {
                    layer: l,
                    built: map.layers.len(),
                    source: Box::new(e),
                })?;
        let layer = layer
            .with_defensive(reference, cfg.defensive_tau)
            .map_err(|e| TransportError::LayerBuild {
                layer: l,
                built: map.layers.len(),
                source: Box::new(e),
            })?;
        evals += report.evals;
        map.build_report.per_layer.push(report);
        map.layers.push(layer);
    }
    map.build_report.target_evals = evals;
    Ok(map)
}

/// Initial right index sets from reference draws mapped to nearest grid
/// nodes, deduplicated per interface.
fn draw_init_indices(
    grid: &GridSpec,
    reference: &ReferenceDensity,
    rank: usize,
    seed: u64,
) -> Vec<Vec<Vec<usize>>> {
    let d = grid.ndim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<usize>> = (0..rank.max(1))
        .map(|_| {
            (0..d)
                .map(|k| grid.nearest_node(k, reference.sample(&mut rng)))
                .collect()
        })
        .collect();
    let mut lists = Vec::with_capacity(d.saturating_sub(1));
    for interface in 1..d {
        let mut set: Vec<Vec<usize>> = Vec::new();
        for s in &samples {
            let suffix = s[interface..].to_vec();
            if !set.contains(&suffix) {
                set.push(suffix);
            }
        }
        let mut attempts = 0;
        while set.len() < rank && attempts < 500 {
            let suffix: Vec<usize> = (interface..d)
                .map(|k| grid.nearest_node(k, reference.sample(&mut rng)))
                .collect();
            if !set.contains(&suffix) {
                set.push(suffix);
            }
            attempts += 1;
        }
        // fall back to uniform nodes if the reference draws keep colliding
        attempts = 0;
        while set.len() < rank && attempts < 500 {
            let suffix: Vec<usize> = (interface..d)
                .map(|k| rng.random_range(0..grid.dims()[k]))
                .collect();
            if !set.contains(&suffix) {
                set.push(suffix);
            }
            attempts += 1;
        }
        lists.push(set);
    }
    lists
}
