//! Shared distribution helpers.

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log-density of the standard normal.
#[inline]
pub fn std_normal_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - 0.5 * LN_2PI
}

/// Log-density of a normal with the given mean and standard deviation.
#[inline]
pub fn normal_ln_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * LN_2PI
}

/// Underlying Gaussian parameters `(mu, sigma)` of a lognormal with the
/// given physical mean and standard deviation (moment matching).
pub fn lognormal_underlying(mean: f64, sd: f64) -> (f64, f64) {
    assert!(mean > 0.0 && sd > 0.0);
    let cv2 = (sd / mean).powi(2);
    let s2 = (1.0 + cv2).ln();
    (mean.ln() - 0.5 * s2, s2.sqrt())
}

/// Log-density of a lognormal parameterized by physical mean and sd.
pub fn lognormal_ln_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let (mu, sigma) = lognormal_underlying(mean, sd);
    let z = (x.ln() - mu) / sigma;
    -0.5 * z * z - sigma.ln() - x.ln() - 0.5 * LN_2PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lognormal_moments_match() {
        let (mu, sigma) = lognormal_underlying(3500.0, 700.0);
        let mean = (mu + 0.5 * sigma * sigma).exp();
        let var = ((sigma * sigma).exp() - 1.0) * (2.0 * mu + sigma * sigma).exp();
        assert!((mean - 3500.0).abs() < 1e-9 * 3500.0);
        assert!((var.sqrt() - 700.0).abs() < 1e-9 * 700.0);
    }

    #[test]
    fn normal_ln_pdf_matches_formula() {
        let v = normal_ln_pdf(1.0, 0.0, 2.0);
        let direct = (1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt())
            * (-1.0f64 / 8.0).exp())
        .ln();
        assert!((v - direct).abs() < 1e-12);
    }
}
