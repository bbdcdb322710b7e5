use crate::report::{mean, sample_std};
use crate::EstimatorError;

/// Outcome of the empirical bias-vs-noise smoothing rule.
#[derive(Debug, Clone)]
pub struct GammaSelection {
    pub gamma_star: f64,
    /// Per-grid-point `(gamma, mean estimate, |bias| vs the sharp reference)`.
    pub table: Vec<(f64, f64, f64)>,
    /// Mean estimate at the sharp reference `gamma_max`.
    pub ref_mean: f64,
    /// Standard error of the reference estimates, `std / sqrt(n_rep)`.
    pub ref_se: f64,
}

/// Selects the smoothing parameter whose estimator bias against a sharp
/// reference at `gamma_max` is closest in magnitude to the reference's own
/// standard error: `argmin_gamma | |P(gamma) - P(gamma_max)| - SE |`.
/// `estimate(gamma, rep)` must return one estimator replication.
pub fn tune_gamma<F>(
    grid: &[f64],
    gamma_max: f64,
    n_rep: usize,
    mut estimate: F,
) -> Result<GammaSelection, EstimatorError>
where
    F: FnMut(f64, usize) -> Result<f64, EstimatorError>,
{
    if grid.is_empty() {
        return Err(EstimatorError::Tuner("empty gamma grid".into()));
    }
    if n_rep < 2 {
        return Err(EstimatorError::Tuner("need at least 2 repetitions".into()));
    }
    let grid_max = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(gamma_max > grid_max) {
        return Err(EstimatorError::Tuner(format!(
            "gamma_max {gamma_max} must exceed the grid maximum {grid_max}"
        )));
    }

    let reference: Vec<f64> = (0..n_rep)
        .map(|r| estimate(gamma_max, r))
        .collect::<Result<_, _>>()?;
    let ref_mean = mean(&reference);
    let ref_se = sample_std(&reference) / (n_rep as f64).sqrt();

    let mut table = Vec::with_capacity(grid.len());
    let mut any_nonzero = ref_mean != 0.0;
    for &gamma in grid {
        let vals: Vec<f64> = (0..n_rep)
            .map(|r| estimate(gamma, r))
            .collect::<Result<_, _>>()?;
        let m = mean(&vals);
        any_nonzero |= m != 0.0;
        table.push((gamma, m, (m - ref_mean).abs()));
    }
    if !any_nonzero {
        return Err(EstimatorError::Tuner(
            "every estimate is zero; failure never observed".into(),
        ));
    }

    // argmin of | |bias| - SE |, ties to the smallest gamma
    let mut best = 0usize;
    let mut best_score = f64::INFINITY;
    for (i, &(_, _, bias)) in table.iter().enumerate() {
        let score = (bias - ref_se).abs();
        if score < best_score {
            best_score = score;
            best = i;
        }
    }
    Ok(GammaSelection { gamma_star: table[best].0, table, ref_mean, ref_se })
}
