use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::TransportError;

/// Product reference density: a zero-mean Gaussian truncated to a box, the
/// same in every dimension. With the default deviation the density stays
/// strictly positive across the box, which keeps every layer map a
/// bijection of the box.
#[derive(Debug, Clone)]
pub struct ReferenceDensity {
    pub std_dev: f64,
    pub lo: f64,
    pub hi: f64,
    normal: Normal,
    mass: f64,
    ln_norm: f64,
}

impl ReferenceDensity {
    pub fn new(std_dev: f64, lo: f64, hi: f64) -> Result<Self, TransportError> {
        if !(std_dev > 0.0) || !(lo < hi) {
            return Err(TransportError::Domain(format!(
                "bad reference parameters: std={std_dev}, box=[{lo}, {hi}]"
            )));
        }
        let normal = Normal::new(0.0, std_dev).expect("positive deviation");
        let mass = normal.cdf(hi) - normal.cdf(lo);
        if !(mass > 0.0) {
            return Err(TransportError::Domain("reference box carries no mass".into()));
        }
        Ok(Self { std_dev, lo, hi, normal, mass, ln_norm: mass.ln() })
    }

    /// Gaussian with deviation 3 on `[-1, 1]`, the working default.
    pub fn default_box() -> Self {
        Self::new(3.0, -1.0, 1.0).expect("valid defaults")
    }

    #[inline]
    pub fn ln_pdf(&self, z: f64) -> f64 {
        self.normal.ln_pdf(z) - self.ln_norm
    }

    #[inline]
    pub fn pdf(&self, z: f64) -> f64 {
        self.normal.pdf(z) / self.mass
    }

    /// CDF over the box; exactly 0 at `lo` and 1 at `hi`.
    #[inline]
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= self.lo {
            0.0
        } else if z >= self.hi {
            1.0
        } else {
            ((self.normal.cdf(z) - self.normal.cdf(self.lo)) / self.mass).clamp(0.0, 1.0)
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let raw = self
            .normal
            .inverse_cdf(self.normal.cdf(self.lo) + p * self.mass);
        raw.clamp(self.lo, self.hi)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    pub fn sample_vec(&self, d: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..d).map(|_| self.sample(rng)).collect()
    }

    pub fn ln_pdf_vec(&self, z: &[f64]) -> f64 {
        z.iter().map(|&v| self.ln_pdf(v)).sum()
    }
}
