use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ttrel_estimators::{run_seed, EstimateReport};
use ttrel_models::ReliabilityProblem;

use crate::sus::std_normal;
use crate::BaselineError;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const COV_JITTER: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CeConfig {
    pub n_per_level: usize,
    /// Fraction of samples kept as elites per level.
    pub elite_fraction: f64,
    pub max_levels: usize,
}

impl Default for CeConfig {
    fn default() -> Self {
        Self { n_per_level: 3000, elite_fraction: 0.1, max_levels: 30 }
    }
}

impl CeConfig {
    pub(crate) fn validate(&self, dim: usize) -> Result<(), BaselineError> {
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(BaselineError::InvalidConfig("elite fraction must be in (0,1)".into()));
        }
        let elites = (self.elite_fraction * self.n_per_level as f64).ceil() as usize;
        if elites < dim + 1 {
            return Err(BaselineError::InvalidConfig(format!(
                "{elites} elites cannot estimate a {dim}-dimensional covariance"
            )));
        }
        if self.max_levels == 0 {
            return Err(BaselineError::InvalidConfig("max_levels must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CeDiag {
    pub thresholds: Vec<f64>,
    pub levels: usize,
    pub truncated: bool,
    pub estimate: f64,
    /// Count of levels where the fitted covariance needed regularization.
    pub jitter_events: usize,
}

/// Cross-Entropy method with a single Gaussian proposal: iteratively
/// samples, keeps the elite quantile, refits mean and covariance with
/// importance weights, and stops once the elite threshold reaches zero,
/// where the current batch already provides the importance-sampling
/// estimate.
pub fn cross_entropy<F>(
    lsf: F,
    dim: usize,
    cfg: &CeConfig,
    reps: usize,
    seed: u64,
) -> Result<(EstimateReport, Vec<CeDiag>), BaselineError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate(dim)?;
    let t0 = std::time::Instant::now();
    let evals = std::sync::atomic::AtomicU64::new(0);
    let counted = |u: &[f64]| {
        evals.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        lsf(u)
    };
    let runs: Result<Vec<CeDiag>, BaselineError> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed(seed, r as u64, 30));
            ce_single(&counted, dim, cfg, &mut rng)
        })
        .collect();
    let runs = runs?;
    let per_run: Vec<f64> = runs.iter().map(|d| d.estimate).collect();
    let mut report = EstimateReport::from_runs(per_run, seed);
    report.lsf_evals = evals.load(std::sync::atomic::Ordering::Relaxed);
    report.truncated = runs.iter().any(|d| d.truncated);
    report.wall_time_secs = t0.elapsed().as_secs_f64();
    Ok((report, runs))
}

/// Prior failure probability of a problem through its standard-normal view.
pub fn ce_prior_pf(
    problem: &ReliabilityProblem,
    cfg: &CeConfig,
    reps: usize,
    seed: u64,
) -> Result<(EstimateReport, Vec<CeDiag>), BaselineError> {
    let lik0 = problem.likelihood_count();
    let (mut report, diags) =
        cross_entropy(|u| problem.sn_lsf(u), problem.sn_dim, cfg, reps, seed)?;
    report.likelihood_evals = problem.likelihood_count() - lik0;
    Ok((report, diags))
}

pub(crate) fn ce_single<F>(
    lsf: &F,
    dim: usize,
    cfg: &CeConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CeDiag, BaselineError>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate(dim)?;
    let n = cfg.n_per_level;
    let n_elite = (cfg.elite_fraction * n as f64).ceil() as usize;
    let mut mean = DVector::<f64>::zeros(dim);
    let mut chol_l = DMatrix::<f64>::identity(dim, dim);
    let mut ln_det = 0.0; // log det of the covariance
    let mut thresholds = Vec::new();
    let mut jitter_events = 0usize;

    for level in 0..cfg.max_levels {
        let mut xs: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut gs: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..n {
            let z = DVector::from_fn(dim, |_, _| std_normal(rng));
            let x = &mean + &chol_l * z;
            gs.push(lsf(x.as_slice()));
            xs.push(x);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| gs[a].partial_cmp(&gs[b]).unwrap().then(a.cmp(&b)));
        let b = gs[order[n_elite - 1]];

        let ln_q = |x: &DVector<f64>| -> f64 {
            let diff = x - &mean;
            let sol = chol_l
                .clone()
                .solve_lower_triangular(&diff)
                .expect("triangular factor is invertible");
            -0.5 * sol.norm_squared() - 0.5 * ln_det - 0.5 * dim as f64 * LN_2PI
        };
        let ln_phi = |x: &DVector<f64>| -> f64 {
            -0.5 * x.norm_squared() - 0.5 * dim as f64 * LN_2PI
        };

        if b <= 0.0 {
            // final level: importance-sampling estimate from this batch
            let mut acc = 0.0;
            for (x, &g) in xs.iter().zip(&gs) {
                if g <= 0.0 {
                    acc += (ln_phi(x) - ln_q(x)).exp();
                }
            }
            return Ok(CeDiag {
                thresholds,
                levels: level + 1,
                truncated: false,
                estimate: acc / n as f64,
                jitter_events,
            });
        }
        thresholds.push(b);
        if level + 1 == cfg.max_levels {
            let mut acc = 0.0;
            for (x, &g) in xs.iter().zip(&gs) {
                if g <= 0.0 {
                    acc += (ln_phi(x) - ln_q(x)).exp();
                }
            }
            return Ok(CeDiag {
                thresholds,
                levels: level + 1,
                truncated: true,
                estimate: acc / n as f64,
                jitter_events,
            });
        }

        // weighted refit on the elite set
        let elite = &order[..n_elite];
        let mut wsum = 0.0;
        let mut new_mean = DVector::<f64>::zeros(dim);
        let mut weights = Vec::with_capacity(n_elite);
        for &i in elite {
            let w = (ln_phi(&xs[i]) - ln_q(&xs[i])).exp();
            weights.push(w);
            wsum += w;
            new_mean += w * &xs[i];
        }
        if wsum <= 0.0 || !wsum.is_finite() {
            return Err(BaselineError::Degenerate("elite weights vanished".into()));
        }
        new_mean /= wsum;
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for (&i, &w) in elite.iter().zip(&weights) {
            let diff = &xs[i] - &new_mean;
            cov += w * &diff * diff.transpose();
        }
        cov /= wsum;
        mean = new_mean;
        let chol = loop {
            match Cholesky::new(cov.clone()) {
                Some(c) => break c,
                None => {
                    jitter_events += 1;
                    if jitter_events > 60 {
                        return Err(BaselineError::Degenerate(
                            "covariance stayed singular under regularization".into(),
                        ));
                    }
                    for i in 0..dim {
                        cov[(i, i)] += COV_JITTER * 10f64.powi(jitter_events as i32 - 1);
                    }
                }
            }
        };
        chol_l = chol.l().clone_owned();
        ln_det = chol_l.diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    }
    unreachable!("loop always returns within max_levels")
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn certain_failure_in_one_level() {
        let cfg = CeConfig { n_per_level: 100, ..Default::default() };
        let (report, diags) = cross_entropy(|_| -1.0, 2, &cfg, 3, 1).unwrap();
        assert!((report.estimate - 1.0).abs() < 1e-12);
        assert!(diags.iter().all(|d| d.levels == 1));
    }

    #[test]
    fn one_dimensional_tail_matches_phi() {
        let cfg = CeConfig { n_per_level: 2000, ..Default::default() };
        let (report, _) = cross_entropy(|u: &[f64]| 2.0 - u[0], 1, &cfg, 10, 3).unwrap();
        let want = Normal::standard().cdf(-2.0);
        let m = report.estimate;
        let var = report
            .per_run
            .iter()
            .map(|v| (v - m) * (v - m))
            .sum::<f64>()
            / (report.per_run.len() - 1) as f64;
        let se = (var / report.per_run.len() as f64).sqrt();
        assert!((m - want).abs() <= 3.0 * se.max(1e-5), "{m} vs {want} (se {se})");
    }

    #[test]
    fn two_dimensional_linear_within_factor_two() {
        let cfg = CeConfig::default();
        let d = 2.0f64;
        let (report, _) = cross_entropy(
            |u: &[f64]| 3.5 - (u[0] + u[1]) / d.sqrt(),
            2,
            &cfg,
            10,
            5,
        )
        .unwrap();
        let want = Normal::standard().cdf(-3.5);
        assert!(report.estimate > want / 2.0 && report.estimate < want * 2.0,
            "estimate {} vs {want}", report.estimate);
    }

    #[test]
    fn elite_thresholds_nonincreasing() {
        let cfg = CeConfig { n_per_level: 1000, ..Default::default() };
        let (_, diags) = cross_entropy(|u: &[f64]| 4.0 - u[0], 1, &cfg, 5, 7).unwrap();
        for d in &diags {
            for w in d.thresholds.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "thresholds increased: {:?}", d.thresholds);
            }
        }
    }

    #[test]
    fn elite_count_validation() {
        let cfg = CeConfig { n_per_level: 30, elite_fraction: 0.1, max_levels: 5 };
        assert!(cross_entropy(|_| 1.0, 5, &cfg, 1, 1).is_err());
    }
}
