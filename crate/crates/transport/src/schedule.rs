use crate::TransportError;

/// Tempering exponents `beta_0 < beta_1 < ... < beta_L = 1`, each in
/// `(0, 1]`. Every entry gets its own transport layer; the geometric
/// constructor reproduces the usual decade ladder (1e-4, 1e-3, ..., 1).
#[derive(Debug, Clone, PartialEq)]
pub struct TemperingSchedule {
    betas: Vec<f64>,
}

impl TemperingSchedule {
    pub fn new(betas: Vec<f64>) -> Result<Self, TransportError> {
        if betas.is_empty() {
            return Err(TransportError::InvalidSchedule("schedule is empty".into()));
        }
        if betas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TransportError::InvalidSchedule(
                "exponents must be strictly increasing".into(),
            ));
        }
        if betas.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
            return Err(TransportError::InvalidSchedule("exponents must lie in (0, 1]".into()));
        }
        if *betas.last().unwrap() != 1.0 {
            return Err(TransportError::InvalidSchedule("final exponent must be exactly 1".into()));
        }
        Ok(Self { betas })
    }

    /// `beta_l = beta0^(1 - l/steps)` for `l = 0..=steps`: `steps + 1`
    /// exponents running from `beta0` to exactly 1.
    pub fn geometric(beta0: f64, steps: usize) -> Result<Self, TransportError> {
        if !(beta0 > 0.0 && beta0 < 1.0) {
            return Err(TransportError::InvalidSchedule(format!(
                "beta0 must be in (0, 1), got {beta0}"
            )));
        }
        if steps == 0 {
            return Err(TransportError::InvalidSchedule("need at least one step".into()));
        }
        let mut betas: Vec<f64> = (0..=steps)
            .map(|l| beta0.powf(1.0 - l as f64 / steps as f64))
            .collect();
        let last = betas.len() - 1;
        betas[last] = 1.0;
        Self::new(betas)
    }

    /// Single direct layer at the full target.
    pub fn direct() -> Self {
        Self { betas: vec![1.0] }
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// One transport layer per exponent.
    pub fn num_layers(&self) -> usize {
        self.betas.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_decade_ladder() {
        let s = TemperingSchedule::geometric(1e-4, 4).unwrap();
        let want = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
        assert_eq!(s.betas().len(), want.len());
        for (a, b) in s.betas().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12 * b, "{a} vs {b}");
        }
        assert_eq!(*s.betas().last().unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_schedules() {
        assert!(TemperingSchedule::new(vec![]).is_err());
        assert!(TemperingSchedule::new(vec![0.5, 0.5, 1.0]).is_err());
        assert!(TemperingSchedule::new(vec![0.1, 0.9]).is_err());
        assert!(TemperingSchedule::new(vec![0.0, 1.0]).is_err());
        assert!(TemperingSchedule::new(vec![1.0]).is_ok());
    }
}
