use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// How failure is expressed on the inference space.
#[derive(Clone)]
pub enum FailureModel {
    /// Scalar limit state `g`; the system fails when `g(x) <= 0`.
    LimitState(ScalarFn),
    /// Conditional failure probability in `[0, 1]`, for problems whose
    /// failure event marginalizes auxiliary variables inside the forward
    /// model.
    ConditionalProbability(ScalarFn),
}

/// One counted forward evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FailureValue {
    LimitState(f64),
    Probability(f64),
}

impl FailureValue {
    /// Sharp failure weight: the indicator for a limit state, the
    /// probability itself for marginalized failure.
    pub fn sharp(&self) -> f64 {
        match *self {
            FailureValue::LimitState(g) => {
                if g <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FailureValue::Probability(p) => p,
        }
    }
}

/// A Bayesian reliability problem: prior, likelihood, failure model, box
/// bounds for transport proposals, and a standard-normal view for the
/// sampling baselines. Closures must be pure; evaluation counters are
/// atomic, so problems are safe to share across worker threads.
#[derive(Clone)]
pub struct ReliabilityProblem {
    pub name: String,
    /// Inference-space dimension (what transport maps and the prior see).
    pub dim: usize,
    /// Physical box per inference variable.
    pub bounds: Vec<(f64, f64)>,
    log_prior: ScalarFn,
    log_likelihood: ScalarFn,
    failure: FailureModel,
    /// Dimension of the standard-normal view; at least `dim`, larger when
    /// failure marginalizes auxiliary variables.
    pub sn_dim: usize,
    sn_lsf: ScalarFn,
    sn_log_likelihood: ScalarFn,
    to_sn: VectorFn,
    from_sn: VectorFn,
    has_likelihood: bool,
    pub lsf_calls: Arc<AtomicU64>,
    pub likelihood_calls: Arc<AtomicU64>,
}

pub struct ProblemParts {
    pub name: String,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    pub log_prior: ScalarFn,
    pub log_likelihood: ScalarFn,
    pub failure: FailureModel,
    pub sn_dim: usize,
    pub sn_lsf: ScalarFn,
    pub sn_log_likelihood: ScalarFn,
    pub to_sn: VectorFn,
    pub from_sn: VectorFn,
    pub has_likelihood: bool,
}

impl ReliabilityProblem {
    pub fn from_parts(parts: ProblemParts) -> Self {
        Self {
            name: parts.name,
            dim: parts.dim,
            bounds: parts.bounds,
            log_prior: parts.log_prior,
            log_likelihood: parts.log_likelihood,
            failure: parts.failure,
            sn_dim: parts.sn_dim,
            sn_lsf: parts.sn_lsf,
            sn_log_likelihood: parts.sn_log_likelihood,
            to_sn: parts.to_sn,
            from_sn: parts.from_sn,
            has_likelihood: parts.has_likelihood,
            lsf_calls: Arc::new(AtomicU64::new(0)),
            likelihood_calls: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Normalized prior log-density at a physical point.
    pub fn log_prior(&self, x: &[f64]) -> f64 {
        (self.log_prior)(x)
    }

    /// Log-likelihood at a physical point (0 when no data). Counted.
    pub fn log_likelihood(&self, x: &[f64]) -> f64 {
        self.likelihood_calls.fetch_add(1, Ordering::Relaxed);
        (self.log_likelihood)(x)
    }

    /// One forward evaluation of the failure model. Counted.
    pub fn eval_failure(&self, x: &[f64]) -> FailureValue {
        self.lsf_calls.fetch_add(1, Ordering::Relaxed);
        match &self.failure {
            FailureModel::LimitState(g) => FailureValue::LimitState(g(x)),
            FailureModel::ConditionalProbability(p) => FailureValue::Probability(p(x)),
        }
    }

    /// Limit state over the standard-normal view. Counted.
    pub fn sn_lsf(&self, u: &[f64]) -> f64 {
        self.lsf_calls.fetch_add(1, Ordering::Relaxed);
        (self.sn_lsf)(u)
    }

    /// Log-likelihood over the standard-normal view. Counted.
    pub fn sn_log_likelihood(&self, u: &[f64]) -> f64 {
        self.likelihood_calls.fetch_add(1, Ordering::Relaxed);
        (self.sn_log_likelihood)(u)
    }

    pub fn to_standard_normal(&self, x: &[f64]) -> Vec<f64> {
        (self.to_sn)(x)
    }

    pub fn from_standard_normal(&self, u: &[f64]) -> Vec<f64> {
        (self.from_sn)(u)
    }

    pub fn has_likelihood(&self) -> bool {
        self.has_likelihood
    }

    pub fn lsf_count(&self) -> u64 {
        self.lsf_calls.load(Ordering::Relaxed)
    }

    pub fn likelihood_count(&self) -> u64 {
        self.likelihood_calls.load(Ordering::Relaxed)
    }
}
