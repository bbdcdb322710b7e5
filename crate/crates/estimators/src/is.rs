use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ttrel_models::{FailureValue, ReliabilityProblem};
use ttrel_transport::{
    dirt_build, DirtConfig, DirtMap, ReferenceDensity, TemperingSchedule, TransportError,
};

use crate::report::{run_seed, EstimateReport};
use crate::sigmoid::{log_smooth_indicator, smooth_indicator};
use crate::EstimatorError;

/// Floor applied to marginalized failure probabilities inside map targets,
/// so tempered log-targets stay finite where the conditional probability
/// is exactly zero. Weights always use the raw value.
const PF_TARGET_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EstimatorOptions {
    /// Samples per run.
    pub n_samples: usize,
    /// Independent repetitions (per-run seeds derived from the master).
    pub reps: usize,
    pub seed: u64,
    /// Sigmoid sharpness used for the logged smoothed reweighting; the map
    /// target was shaped with the same value.
    pub gamma: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { n_samples: 10_000, reps: 10, seed: 0, gamma: 1000.0 }
    }
}

/// Smoothed failure weight of one forward evaluation.
pub fn smooth_failure(value: FailureValue, gamma: f64) -> f64 {
    match value {
        FailureValue::LimitState(g) => smooth_indicator(g, gamma),
        FailureValue::Probability(p) => p,
    }
}

/// Log of the smoothed failure weight, floored for marginalized failure.
pub fn log_smooth_failure(value: FailureValue, gamma: f64) -> f64 {
    match value {
        FailureValue::LimitState(g) => log_smooth_indicator(g, gamma),
        FailureValue::Probability(p) => p.max(PF_TARGET_FLOOR).ln(),
    }
}

/// Builds the proposal map for prior failure probability: the transport
/// targets `s_gamma(g) * prior`, the smoothed optimal proposal.
pub fn build_prior_failure_map(
    problem: &ReliabilityProblem,
    gamma: f64,
    schedule: &TemperingSchedule,
    reference: &ReferenceDensity,
    cfg: &DirtConfig,
) -> Result<DirtMap, TransportError> {
    let p = problem.clone();
    let log_target = move |x: &[f64]| {
        let fv = p.eval_failure(x);
        log_smooth_failure(fv, gamma) + p.log_prior(x)
    };
    dirt_build(&problem.bounds, log_target, schedule, reference, cfg)
}

/// Builds the two proposal maps of the posterior ratio estimator: the
/// numerator map targets `s_gamma(g) * likelihood * prior`, the denominator
/// map targets `likelihood * prior`.
pub fn build_posterior_maps(
    problem: &ReliabilityProblem,
    gamma: f64,
    schedule: &TemperingSchedule,
    reference: &ReferenceDensity,
    cfg: &DirtConfig,
) -> Result<(DirtMap, DirtMap), TransportError> {
    let p = problem.clone();
    let log_target_q = move |x: &[f64]| {
        let fv = p.eval_failure(x);
        log_smooth_failure(fv, gamma) + p.log_likelihood(x) + p.log_prior(x)
    };
    let map_q = dirt_build(&problem.bounds, log_target_q, schedule, reference, cfg)?;

    let p = problem.clone();
    let log_target_z = move |x: &[f64]| p.log_likelihood(x) + p.log_prior(x);
    let mut cfg_z = cfg.clone();
    cfg_z.seed = cfg.seed.wrapping_add(0x5A5A);
    let map_z = dirt_build(&problem.bounds, log_target_z, schedule, reference, &cfg_z)?;
    Ok((map_q, map_z))
}

/// Importance-sampling estimate of the prior failure probability with a
/// transport-map proposal: `mean(sharp(x) * prior(x) / proposal(x))` over
/// map samples. The sharp failure weight keeps the estimator free of
/// smoothing bias; the smoothed reweighting is logged alongside.
pub fn estimate_prior_pf(
    map: &DirtMap,
    problem: &ReliabilityProblem,
    opts: &EstimatorOptions,
) -> Result<EstimateReport, EstimatorError> {
    validate(opts)?;
    let t0 = std::time::Instant::now();
    let lsf0 = problem.lsf_count();
    let lik0 = problem.likelihood_count();
    let runs: Result<Vec<(f64, f64)>, EstimatorError> = (0..opts.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed(opts.seed, r as u64, 1));
            let mut acc_sharp = 0.0;
            let mut acc_smooth = 0.0;
            for _ in 0..opts.n_samples {
                let u = map.sample_reference(&mut rng);
                let (x, logp) = map.sample(&u)?;
                if !logp.is_finite() {
                    return Err(EstimatorError::Weight(format!(
                        "proposal log-density {logp} at {x:?}"
                    )));
                }
                let fv = problem.eval_failure(&x);
                let lw = problem.log_prior(&x) - logp;
                let sharp = fv.sharp();
                if sharp > 0.0 {
                    acc_sharp += sharp * lw.exp();
                }
                let smooth = smooth_failure(fv, opts.gamma);
                if smooth > 0.0 {
                    acc_smooth += smooth * lw.exp();
                }
            }
            Ok((acc_sharp / opts.n_samples as f64, acc_smooth / opts.n_samples as f64))
        })
        .collect();
    let runs = runs?;
    let (sharp, smooth): (Vec<f64>, Vec<f64>) = runs.into_iter().unzip();
    let mut report = EstimateReport::from_runs(sharp, opts.seed);
    report.smoothed_estimate = Some(crate::report::mean(&smooth));
    report.lsf_evals = problem.lsf_count() - lsf0;
    report.likelihood_evals = problem.likelihood_count() - lik0;
    report.wall_time_secs = t0.elapsed().as_secs_f64();
    Ok(report)
}

/// Ratio estimator for the posterior failure probability: numerator and
/// denominator are independent importance-sampling sums under their own
/// maps, so the evidence never has to be computed explicitly.
pub fn estimate_posterior_pf(
    map_q: &DirtMap,
    map_z: &DirtMap,
    problem: &ReliabilityProblem,
    opts: &EstimatorOptions,
) -> Result<EstimateReport, EstimatorError> {
    validate(opts)?;
    let t0 = std::time::Instant::now();
    let lsf0 = problem.lsf_count();
    let lik0 = problem.likelihood_count();
    let runs: Result<Vec<(f64, f64)>, EstimatorError> = (0..opts.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng_q = ChaCha8Rng::seed_from_u64(run_seed(opts.seed, r as u64, 2));
            let mut rng_z = ChaCha8Rng::seed_from_u64(run_seed(opts.seed, r as u64, 3));
            let n = opts.n_samples as f64;

            let mut q_sharp = 0.0;
            let mut q_smooth = 0.0;
            for _ in 0..opts.n_samples {
                let u = map_q.sample_reference(&mut rng_q);
                let (x, logp) = map_q.sample(&u)?;
                let fv = problem.eval_failure(&x);
                let lw = problem.log_likelihood(&x) + problem.log_prior(&x) - logp;
                let sharp = fv.sharp();
                if sharp > 0.0 {
                    q_sharp += sharp * lw.exp();
                }
                let smooth = smooth_failure(fv, opts.gamma);
                if smooth > 0.0 {
                    q_smooth += smooth * lw.exp();
                }
            }

            let mut z_acc = 0.0;
            for _ in 0..opts.n_samples {
                let u = map_z.sample_reference(&mut rng_z);
                let (x, logp) = map_z.sample(&u)?;
                let lw = problem.log_likelihood(&x) + problem.log_prior(&x) - logp;
                z_acc += lw.exp();
            }
            if z_acc == 0.0 {
                return Err(EstimatorError::DegenerateProposal);
            }
            Ok(((q_sharp / n) / (z_acc / n), (q_smooth / n) / (z_acc / n)))
        })
        .collect();
    let runs = runs?;
    let (sharp, smooth): (Vec<f64>, Vec<f64>) = runs.into_iter().unzip();
    let mut report = EstimateReport::from_runs(sharp, opts.seed);
    report.smoothed_estimate = Some(crate::report::mean(&smooth));
    report.lsf_evals = problem.lsf_count() - lsf0;
    report.likelihood_evals = problem.likelihood_count() - lik0;
    report.wall_time_secs = t0.elapsed().as_secs_f64();
    Ok(report)
}

fn validate(opts: &EstimatorOptions) -> Result<(), EstimatorError> {
    if opts.n_samples == 0 || opts.reps == 0 {
        return Err(EstimatorError::InvalidOptions(
            "need at least one sample and one repetition".into(),
        ));
    }
    if !(opts.gamma > 0.0) {
        return Err(EstimatorError::InvalidOptions("gamma must be positive".into()));
    }
    Ok(())
}
