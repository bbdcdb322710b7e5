//! Sampling baselines the transport estimators are compared against:
//! Subset Simulation for prior failure probabilities, its BUS-augmented
//! posterior variant, and the Cross-Entropy method with a single Gaussian
//! proposal family. All operate in standard-normal space through each
//! problem's isoprobabilistic view and share the estimator report schema.

mod bus;
mod ce;
mod sus;

pub use bus::{bus_ce_posterior, bus_sus_posterior, BusDiag};
pub use ce::{ce_prior_pf, cross_entropy, CeConfig, CeDiag};
pub use sus::{subset_simulation, sus_prior_pf, SusConfig, SusDiag};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("observed log-likelihood {observed} exceeds the BUS bound {bound} after {retries} retries")]
    CViolation { observed: f64, bound: f64, retries: usize },

    #[error("degenerate state: {0}")]
    Degenerate(String),
}
