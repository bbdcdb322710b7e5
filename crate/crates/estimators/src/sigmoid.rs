/// Sigmoid relaxation of the failure indicator:
/// `s_gamma(g) = 1 / (1 + exp(gamma * g))`, which tends to the sharp
/// indicator of `{g <= 0}` as `gamma` grows. Saturates cleanly for
/// `|gamma * g|` far beyond 1e3, and satisfies
/// `s(g) + s(-g) == 1` exactly by construction.
pub fn smooth_indicator(g: f64, gamma: f64) -> f64 {
    debug_assert!(gamma > 0.0);
    let t = gamma * g;
    let e = (-t.abs()).exp();
    let lo = e / (1.0 + e);
    if t >= 0.0 {
        lo
    } else {
        1.0 - lo
    }
}

/// `ln s_gamma(g) = -softplus(gamma * g)`, stable for large exponents.
pub fn log_smooth_indicator(g: f64, gamma: f64) -> f64 {
    debug_assert!(gamma > 0.0);
    -softplus(gamma * g)
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_is_half() {
        for gamma in [0.5, 1.0, 100.0, 1e6] {
            assert_eq!(smooth_indicator(0.0, gamma), 0.5);
        }
    }

    #[test]
    fn deep_failure_saturates_to_one() {
        let v = smooth_indicator(-10.0, 1000.0);
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(smooth_indicator(10.0, 1000.0), 0.0f64.max(smooth_indicator(10.0, 1000.0)));
        assert!(smooth_indicator(10.0, 1000.0) < 1e-300);
    }

    #[test]
    fn scalar_value() {
        // gamma = 2, g = 1: 1 / (1 + e^2)
        let want = 1.0 / (1.0 + (2.0f64).exp());
        let got = smooth_indicator(1.0, 2.0);
        assert!((got - want).abs() < 1e-15);
        assert!((got - 0.11920).abs() < 1e-5);
    }

    #[test]
    fn symmetry_exact_and_range_open() {
        for &g in &[-5.0, -0.3, 0.0, 0.7, 4.0] {
            for &gamma in &[0.1, 1.0, 37.5] {
                let a = smooth_indicator(g, gamma);
                let b = smooth_indicator(-g, gamma);
                assert_eq!(a + b, 1.0, "s(g) + s(-g) must be exactly 1");
                assert!((0.0..=1.0).contains(&a));
            }
        }
    }

    #[test]
    fn log_matches_linear_where_both_representable() {
        for &g in &[-2.0, -0.1, 0.0, 0.1, 2.0] {
            let lin = smooth_indicator(g, 3.0).ln();
            let log = log_smooth_indicator(g, 3.0);
            assert!((lin - log).abs() < 1e-12);
        }
        // far tail stays finite in log space
        assert!(log_smooth_indicator(50.0, 1000.0) < -49_000.0);
        assert!(log_smooth_indicator(50.0, 1000.0).is_finite());
    }
}
