//! Failure-probability estimators built on transport-map proposals, plus
//! the crude Monte Carlo reference and the smoothing-parameter tuner.
//!
//! The importance-sampling weights always carry the sharp failure model;
//! the sigmoid smoothing only shapes the proposal density the maps are
//! built for. The smoothed reweighting is computed alongside and logged in
//! the report for comparison.

mod gamma;
mod is;
mod mc;
mod report;
mod sigmoid;

pub use gamma::{tune_gamma, GammaSelection};
pub use is::{
    build_posterior_maps, build_prior_failure_map, estimate_posterior_pf, estimate_prior_pf,
    log_smooth_failure, smooth_failure, EstimatorOptions,
};
pub use mc::crude_mc;
pub use report::{cov_over_runs, run_seed, EstimateReport};
pub use sigmoid::{log_smooth_indicator, smooth_indicator};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Transport(#[from] ttrel_transport::TransportError),

    #[error("normalizing-constant estimate is zero; proposal is degenerate")]
    DegenerateProposal,

    #[error("weight error: {0}")]
    Weight(String),

    #[error("coefficient of variation undefined: {0}")]
    UndefinedCov(String),

    #[error("smoothing tuner failed: {0}")]
    Tuner(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
