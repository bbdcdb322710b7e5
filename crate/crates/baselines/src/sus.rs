use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ttrel_estimators::{run_seed, EstimateReport};
use ttrel_models::ReliabilityProblem;

use crate::BaselineError;

#[derive(Debug, Clone)]
pub struct SusConfig {
    pub n_per_level: usize,
    /// Conditional probability per level.
    pub p0: f64,
    pub max_levels: usize,
    /// Initial spread of the component-wise Gaussian proposal.
    pub proposal_spread: f64,
}

impl Default for SusConfig {
    fn default() -> Self {
        Self { n_per_level: 3000, p0: 0.1, max_levels: 25, proposal_spread: 1.0 }
    }
}

impl SusConfig {
    fn validate(&self) -> Result<(), BaselineError> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(BaselineError::InvalidConfig("p0 must be in (0,1)".into()));
        }
        let seeds = self.p0 * self.n_per_level as f64;
        if (seeds - seeds.round()).abs() > 1e-9 || seeds.round() < 2.0 {
            return Err(BaselineError::InvalidConfig(format!(
                "N * p0 = {seeds} must be an integer >= 2"
            )));
        }
        if self.max_levels == 0 {
            return Err(BaselineError::InvalidConfig("max_levels must be positive".into()));
        }
        Ok(())
    }
}

/// Per-run trace: intermediate thresholds, final level fraction, and level
/// count, to audit the product form `p0^(m-1) * p_final`.
#[derive(Debug, Clone)]
pub struct SusDiag {
    pub thresholds: Vec<f64>,
    pub final_fraction: f64,
    pub levels: usize,
    pub truncated: bool,
    pub estimate: f64,
}

/// Subset Simulation with adaptive intermediate thresholds at the
/// `p0`-quantile and component-wise Gaussian (modified Metropolis)
/// resampling targeting 0.44 acceptance.
pub fn subset_simulation<F>(
    lsf: F,
    dim: usize,
    cfg: &SusConfig,
    reps: usize,
    seed: u64,
) -> Result<(EstimateReport, Vec<SusDiag>), BaselineError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let t0 = std::time::Instant::now();
    let evals = AtomicU64::new(0);
    let counted = |u: &[f64]| {
        evals.fetch_add(1, Ordering::Relaxed);
        lsf(u)
    };
    let runs: Vec<SusDiag> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed(seed, r as u64, 10));
            sus_single(&counted, dim, cfg, &mut rng)
        })
        .collect();
    let per_run: Vec<f64> = runs.iter().map(|d| d.estimate).collect();
    let mut report = EstimateReport::from_runs(per_run, seed);
    report.lsf_evals = evals.load(Ordering::Relaxed);
    report.truncated = runs.iter().any(|d| d.truncated);
    report.wall_time_secs = t0.elapsed().as_secs_f64();
    Ok((report, runs))
}

/// Prior failure probability of a problem through its standard-normal view.
pub fn sus_prior_pf(
    problem: &ReliabilityProblem,
    cfg: &SusConfig,
    reps: usize,
    seed: u64,
) -> Result<(EstimateReport, Vec<SusDiag>), BaselineError> {
    let lik0 = problem.likelihood_count();
    let (mut report, diags) =
        subset_simulation(|u| problem.sn_lsf(u), problem.sn_dim, cfg, reps, seed)?;
    report.likelihood_evals = problem.likelihood_count() - lik0;
    Ok((report, diags))
}

pub(crate) fn sus_single<F>(lsf: &F, dim: usize, cfg: &SusConfig, rng: &mut ChaCha8Rng) -> SusDiag
where
    F: Fn(&[f64]) -> f64,
{
    let n = cfg.n_per_level;
    let n_seed = (cfg.p0 * n as f64).round() as usize;
    let mut samples: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| std_normal(rng)).collect())
        .collect();
    let mut g: Vec<f64> = samples.iter().map(|u| lsf(u)).collect();

    let mut thresholds = Vec::new();
    let mut lambda: f64 = 0.6;
    for level in 0..cfg.max_levels {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| g[a].partial_cmp(&g[b]).unwrap().then(a.cmp(&b)));
        let b = g[order[n_seed - 1]];
        if b <= 0.0 {
            let frac = g.iter().filter(|&&v| v <= 0.0).count() as f64 / n as f64;
            return SusDiag {
                thresholds,
                final_fraction: frac,
                levels: level + 1,
                truncated: false,
                estimate: cfg.p0.powi(level as i32) * frac,
            };
        }
        thresholds.push(b);
        if level + 1 == cfg.max_levels {
            let frac = g.iter().filter(|&&v| v <= 0.0).count() as f64 / n as f64;
            return SusDiag {
                thresholds,
                final_fraction: frac,
                levels: level + 1,
                truncated: true,
                estimate: cfg.p0.powi(level as i32 + 1) * frac,
            };
        }

        // conditional resampling by the adaptive conditional sampler: the
        // candidate `a u + sqrt(1 - a^2) xi` preserves the standard normal
        // by construction, so acceptance only checks the level event. Each
        // seed runs one chain; lengths distribute the remainder.
        let base_len = n / n_seed;
        let extra = n % n_seed;
        let mut new_samples = Vec::with_capacity(n);
        let mut new_g = Vec::with_capacity(n);
        let batch = n_seed.div_ceil(10).max(1);
        let mut batch_acc = 0usize;
        let mut batch_prop = 0usize;
        let mut batch_no = 0usize;
        for (ci, &si) in order[..n_seed].iter().enumerate() {
            let len = base_len + usize::from(ci < extra);
            let mut cur = samples[si].clone();
            let mut cur_g = g[si];
            new_samples.push(cur.clone());
            new_g.push(cur_g);
            let sigma = (cfg.proposal_spread * lambda).clamp(1e-3, 1.0);
            let a = (1.0 - sigma * sigma).max(0.0).sqrt();
            for _ in 1..len {
                let cand: Vec<f64> =
                    cur.iter().map(|&v| a * v + sigma * std_normal(rng)).collect();
                let cand_g = lsf(&cand);
                batch_prop += 1;
                if cand_g <= b {
                    cur = cand;
                    cur_g = cand_g;
                    batch_acc += 1;
                }
                new_samples.push(cur.clone());
                new_g.push(cur_g);
            }
            if (ci + 1) % batch == 0 {
                batch_no += 1;
                if batch_prop > 0 {
                    let acc = batch_acc as f64 / batch_prop as f64;
                    lambda *= ((acc - 0.44) / (batch_no as f64).sqrt()).exp();
                }
                batch_acc = 0;
                batch_prop = 0;
            }
        }
        samples = new_samples;
        g = new_g;
    }
    unreachable!("loop always returns within max_levels")
}

pub(crate) fn std_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
