use std::sync::Arc;

use crate::problem::{FailureModel, ProblemParts, ReliabilityProblem};
use crate::util::std_normal_ln_pdf;

/// Linear limit state over independent standard Gaussians:
/// `g(theta) = alpha - sum(theta) / sqrt(d)`. The failure probability is
/// `Phi(-alpha)` for every dimension.
pub fn linear_lsf(theta: &[f64], alpha: f64) -> f64 {
    let d = theta.len() as f64;
    alpha - theta.iter().sum::<f64>() / d.sqrt()
}

/// Prior-failure benchmark with the linear limit state. The box covers the
/// per-coordinate failure shift `alpha / sqrt(d)` with a generous margin.
pub fn linear_problem(d: usize, alpha: f64) -> ReliabilityProblem {
    assert!(d >= 1);
    let shift = alpha / (d as f64).sqrt();
    let bounds = vec![(shift - 7.0, shift + 7.0); d];
    let lsf: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> =
        Arc::new(move |x: &[f64]| linear_lsf(x, alpha));
    ReliabilityProblem::from_parts(ProblemParts {
        name: format!("linear(d={d}, alpha={alpha})"),
        dim: d,
        bounds,
        log_prior: Arc::new(|x: &[f64]| x.iter().map(|&v| std_normal_ln_pdf(v)).sum()),
        log_likelihood: Arc::new(|_: &[f64]| 0.0),
        failure: FailureModel::LimitState(lsf.clone()),
        sn_dim: d,
        sn_lsf: lsf,
        sn_log_likelihood: Arc::new(|_: &[f64]| 0.0),
        to_sn: Arc::new(|x: &[f64]| x.to_vec()),
        from_sn: Arc::new(|u: &[f64]| u.to_vec()),
        has_likelihood: false,
    })
}
