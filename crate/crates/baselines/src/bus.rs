use std::cell::Cell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use ttrel_estimators::{run_seed, EstimateReport};
use ttrel_models::ReliabilityProblem;

use crate::ce::{ce_single, CeConfig};
use crate::sus::{std_normal, sus_single, SusConfig, SusDiag};
use crate::BaselineError;

const C_MARGIN_LN: f64 = 0.5; // multiplicative safety on the likelihood bound
const C_RETRIES: usize = 3;

/// Diagnostics of the auxiliary-variable construction.
#[derive(Debug, Clone)]
pub struct BusDiag {
    /// Log of the likelihood bound `c` finally used.
    pub c_log: f64,
    /// Largest log-likelihood observed during estimation runs.
    pub max_observed: f64,
    pub retries: usize,
    pub acceptance: Vec<SusDiag>,
    pub joint: Vec<SusDiag>,
}

/// Posterior failure probability by Bayesian updating with structural
/// reliability: the parameter space is augmented with one uniform variable,
/// the acceptance event `{c u <= L(x)}` recasts conditioning on the data as
/// a reliability problem, and the posterior probability is the ratio
/// `P(F and A) / P(A)`, each term estimated by Subset Simulation with
/// paired seeds. The bound `c` starts from a pilot maximum and is raised
/// and re-run if any later sample exceeds it.
pub fn bus_sus_posterior(
    problem: &ReliabilityProblem,
    cfg: &SusConfig,
    reps: usize,
    seed: u64,
) -> Result<(EstimateReport, BusDiag), BaselineError> {
    let t0 = std::time::Instant::now();
    let lsf0 = problem.lsf_count();
    let lik0 = problem.likelihood_count();
    let mut c_log = pilot_bound(problem, cfg.n_per_level, seed);
    let mut retries = 0;
    loop {
        let d_aug = problem.sn_dim + 1;
        let normal = Normal::standard();
        let results: Vec<(f64, f64, SusDiag, SusDiag)> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let max_seen = Cell::new(f64::NEG_INFINITY);
                let h_accept = |u: &[f64]| {
                    let ll = problem.sn_log_likelihood(&u[..problem.sn_dim]);
                    if ll > max_seen.get() {
                        max_seen.set(ll);
                    }
                    normal.cdf(u[d_aug - 1]).ln() - (ll - c_log)
                };
                let h_joint = |u: &[f64]| {
                    let g = problem.sn_lsf(&u[..problem.sn_dim]);
                    h_accept(u).max(g)
                };
                let mut rng_a = ChaCha8Rng::seed_from_u64(run_seed(seed, r as u64, 20));
                let diag_a = sus_single(&h_accept, d_aug, cfg, &mut rng_a);
                let mut rng_f = ChaCha8Rng::seed_from_u64(run_seed(seed, r as u64, 21));
                let diag_f = sus_single(&h_joint, d_aug, cfg, &mut rng_f);
                let ratio =
                    if diag_a.estimate > 0.0 { diag_f.estimate / diag_a.estimate } else { 0.0 };
                (ratio, max_seen.get(), diag_a, diag_f)
            })
            .collect();

        let max_observed = results.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        if max_observed <= c_log {
            let per_run: Vec<f64> = results.iter().map(|t| t.0).collect();
            let mut report = EstimateReport::from_runs(per_run, seed);
            report.truncated = results.iter().any(|t| t.2.truncated || t.3.truncated);
            report.lsf_evals = problem.lsf_count() - lsf0;
            report.likelihood_evals = problem.likelihood_count() - lik0;
            report.wall_time_secs = t0.elapsed().as_secs_f64();
            let diag = BusDiag {
                c_log,
                max_observed,
                retries,
                acceptance: results.iter().map(|t| t.2.clone()).collect(),
                joint: results.into_iter().map(|t| t.3).collect(),
            };
            return Ok((report, diag));
        }
        retries += 1;
        if retries > C_RETRIES {
            return Err(BaselineError::CViolation { observed: max_observed, bound: c_log, retries });
        }
        c_log = max_observed + C_MARGIN_LN;
    }
}

fn pilot_bound(problem: &ReliabilityProblem, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(seed, 0, 22));
    let mut best = f64::NEG_INFINITY;
    let mut u = vec![0.0; problem.sn_dim];
    for _ in 0..n {
        for v in &mut u {
            *v = std_normal(&mut rng);
        }
        best = best.max(problem.sn_log_likelihood(&u));
    }
    best + C_MARGIN_LN
}

/// Cross-Entropy counterpart of [`bus_sus_posterior`]: both the acceptance
/// event and the joint failure-and-acceptance event are estimated by CE in
/// the augmented space; the bound cancels in the ratio.
pub fn bus_ce_posterior(
    problem: &ReliabilityProblem,
    cfg: &CeConfig,
    reps: usize,
    seed: u64,
) -> Result<(EstimateReport, BusDiag), BaselineError> {
    let t0 = std::time::Instant::now();
    let lsf0 = problem.lsf_count();
    let lik0 = problem.likelihood_count();
    let d_aug = problem.sn_dim + 1;
    cfg.validate(d_aug)?;
    let mut c_log = pilot_bound(problem, cfg.n_per_level, seed);
    let mut retries = 0;
    loop {
        let normal = Normal::standard();
        let results: Result<Vec<(f64, f64)>, BaselineError> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let max_seen = Cell::new(f64::NEG_INFINITY);
                let h_accept = |u: &[f64]| {
                    let ll = problem.sn_log_likelihood(&u[..problem.sn_dim]);
                    if ll > max_seen.get() {
                        max_seen.set(ll);
                    }
                    normal.cdf(u[d_aug - 1]).ln() - (ll - c_log)
                };
                let h_joint = |u: &[f64]| {
                    let g = problem.sn_lsf(&u[..problem.sn_dim]);
                    h_accept(u).max(g)
                };
                let mut rng_a = ChaCha8Rng::seed_from_u64(run_seed(seed, r as u64, 23));
                let pa = ce_single(&h_accept, d_aug, cfg, &mut rng_a)?;
                let mut rng_f = ChaCha8Rng::seed_from_u64(run_seed(seed, r as u64, 24));
                let pf = ce_single(&h_joint, d_aug, cfg, &mut rng_f)?;
                let ratio = if pa.estimate > 0.0 { pf.estimate / pa.estimate } else { 0.0 };
                Ok((ratio, max_seen.get()))
            })
            .collect();
        let results = results?;
        let max_observed = results.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        if max_observed <= c_log {
            let per_run: Vec<f64> = results.iter().map(|t| t.0).collect();
            let mut report = EstimateReport::from_runs(per_run, seed);
            report.lsf_evals = problem.lsf_count() - lsf0;
            report.likelihood_evals = problem.likelihood_count() - lik0;
            report.wall_time_secs = t0.elapsed().as_secs_f64();
            let diag = BusDiag {
                c_log,
                max_observed,
                retries,
                acceptance: Vec::new(),
                joint: Vec::new(),
            };
            return Ok((report, diag));
        }
        retries += 1;
        if retries > C_RETRIES {
            return Err(BaselineError::CViolation { observed: max_observed, bound: c_log, retries });
        }
        c_log = max_observed + C_MARGIN_LN;
    }
}
