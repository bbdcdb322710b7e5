//! Benchmark problem definitions for rare-event estimation: limit-state
//! functions, priors, likelihoods, and the Gaussian random-field machinery
//! behind them.
//!
//! Every benchmark is packaged as a [`ReliabilityProblem`]: an inference
//! space with box bounds (used by transport-map proposals), a prior and an
//! optional likelihood, a failure model, and an isoprobabilistic view onto
//! standard-normal space for the sampling baselines.

mod beam;
mod cantilever;
mod error;
mod kl;
mod linear;
mod problem;
pub mod util;

pub use beam::{
    corroded_beam_problem, corroded_beam_stress, corroded_beam_stress_with_density,
    BEAM_DATA_FIRST, BEAM_DATA_SECOND, BEAM_SIGMA_MAX_PA, STEEL_DENSITY_N_PER_M3,
};
pub use cantilever::{
    cantilever_deflection, cantilever_problem, cantilever_true_tip, CantileverConfig,
    CANTILEVER_DELTA_MAX_M, CANTILEVER_LENGTH_M, CANTILEVER_LOAD_KN,
};
pub use error::ModelError;
pub use kl::{kl_expand, KernelSpec, KlField};
pub use linear::{linear_lsf, linear_problem};
pub use problem::{FailureModel, FailureValue, ProblemParts, ReliabilityProblem, ScalarFn, VectorFn};
