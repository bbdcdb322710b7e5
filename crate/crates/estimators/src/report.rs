use serde::Serialize;

use crate::EstimatorError;

/// Outcome of a repeated estimator run: the headline estimate is the mean
/// of per-run estimates, spread is reported as CoV over runs, and the
/// evaluation counters come from the problem's counting wrappers.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub per_run: Vec<f64>,
    /// Sample standard deviation over runs divided by the mean.
    pub cov: f64,
    pub lsf_evals: u64,
    pub likelihood_evals: u64,
    pub seed: u64,
    pub wall_time_secs: f64,
    /// Mean of the smoothed-indicator reweighting, when the estimator
    /// computes one.
    pub smoothed_estimate: Option<f64>,
    /// Set when an iteration cap cut the run short.
    pub truncated: bool,
}

impl EstimateReport {
    pub fn from_runs(per_run: Vec<f64>, seed: u64) -> Self {
        let estimate = mean(&per_run);
        let cov = if per_run.len() >= 2 && estimate != 0.0 {
            sample_std(&per_run) / estimate
        } else {
            0.0
        };
        Self {
            estimate,
            per_run,
            cov,
            lsf_evals: 0,
            likelihood_evals: 0,
            seed,
            wall_time_secs: 0.0,
            smoothed_estimate: None,
            truncated: false,
        }
    }
}

/// Sample standard deviation divided by the sample mean.
pub fn cov_over_runs(estimates: &[f64]) -> Result<f64, EstimatorError> {
    if estimates.len() < 2 {
        return Err(EstimatorError::UndefinedCov(format!(
            "need at least 2 estimates, got {}",
            estimates.len()
        )));
    }
    let m = mean(estimates);
    if m == 0.0 {
        return Err(EstimatorError::UndefinedCov("mean of estimates is zero".into()));
    }
    Ok(sample_std(estimates) / m)
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn sample_std(v: &[f64]) -> f64 {
    let m = mean(v);
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (v.len() - 1) as f64).sqrt()
}

/// Deterministic per-run stream: the run index is mixed into the master
/// seed (splitmix-style), so runs are independent of scheduling order.
pub fn run_seed(master: u64, run: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(run.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_values_have_zero_cov() {
        assert_eq!(cov_over_runs(&[0.3, 0.3, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_pair() {
        // std((1,3)) = sqrt(2), mean = 2
        let c = cov_over_runs(&[1.0, 3.0]).unwrap();
        assert!((c - 2.0f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((c - 0.7071).abs() < 1e-4);
    }

    #[test]
    fn scale_invariance() {
        let v = [0.2, 0.5, 0.9, 0.4];
        let scaled: Vec<f64> = v.iter().map(|x| 17.0 * x).collect();
        let a = cov_over_runs(&v).unwrap();
        let b = cov_over_runs(&scaled).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn zero_mean_is_an_error() {
        assert!(cov_over_runs(&[0.0, 0.0]).is_err());
        assert!(cov_over_runs(&[1.0]).is_err());
    }

    #[test]
    fn run_seeds_differ() {
        let a = run_seed(42, 0, 0);
        let b = run_seed(42, 1, 0);
        let c = run_seed(42, 0, 1);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, run_seed(42, 0, 0));
    }
}
