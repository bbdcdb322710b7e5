use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ttrel_models::ReliabilityProblem;

use crate::report::{run_seed, EstimateReport};

/// Crude Monte Carlo over the standard-normal view: the mean of the sharp
/// failure indicator over `n` independent prior draws, repeated `reps`
/// times for the CoV.
pub fn crude_mc(problem: &ReliabilityProblem, n: usize, reps: usize, seed: u64) -> EstimateReport {
    let t0 = std::time::Instant::now();
    let lsf0 = problem.lsf_count();
    let lik0 = problem.likelihood_count();
    let per_run: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed(seed, r as u64, 0));
            let mut hits = 0usize;
            let mut u = vec![0.0; problem.sn_dim];
            for _ in 0..n {
                for v in &mut u {
                    *v = std_normal(&mut rng);
                }
                if problem.sn_lsf(&u) <= 0.0 {
                    hits += 1;
                }
            }
            hits as f64 / n as f64
        })
        .collect();
    let mut report = EstimateReport::from_runs(per_run, seed);
    report.lsf_evals = problem.lsf_count() - lsf0;
    report.likelihood_evals = problem.likelihood_count() - lik0;
    report.wall_time_secs = t0.elapsed().as_secs_f64();
    report
}

pub(crate) fn std_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
