use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::problem::{FailureModel, ProblemParts, ReliabilityProblem};
use crate::util::{lognormal_underlying, normal_ln_pdf, LN_2PI};
use crate::ModelError;

/// Steel self-weight density, N/m^3.
pub const STEEL_DENSITY_N_PER_M3: f64 = 78.5e3;
/// Allowable stress, Pa.
pub const BEAM_SIGMA_MAX_PA: f64 = 500e6;
/// Observed (width, height) pairs for the two corrosion updates, in meters.
pub const BEAM_DATA_FIRST: (f64, f64) = (0.18, 0.026);
pub const BEAM_DATA_SECOND: (f64, f64) = (0.14, 0.019);

const CORR_BH: f64 = 0.4;

// hyperprior parameters: means are normal, standard deviations lognormal
const MU_B_MEAN: f64 = 0.2;
const MU_B_SD: f64 = 0.03;
const MU_H_MEAN: f64 = 0.03;
const MU_H_SD: f64 = 4.5e-3;
const SIG_B_MEAN: f64 = 0.03;
const SIG_B_SD: f64 = 4.5e-3;
const SIG_H_MEAN: f64 = 4.5e-3;
const SIG_H_SD: f64 = 6.75e-4;

const LOAD_MEAN_N: f64 = 3500.0;
const LOAD_SD_N: f64 = 700.0;
const SPAN_MEAN_M: f64 = 5.0;
const SPAN_SD_M: f64 = 0.5;

/// Maximum midspan bending stress of the simply supported beam under a
/// midspan point load plus self-weight: `sigma = M / W` with
/// `W = b h^2 / 6` and `M = F L / 4 + rho b h L^2 / 8`.
pub fn corroded_beam_stress(b: f64, h: f64, f_load: f64, l_span: f64) -> Result<f64, ModelError> {
    corroded_beam_stress_with_density(b, h, f_load, l_span, STEEL_DENSITY_N_PER_M3)
}

pub fn corroded_beam_stress_with_density(
    b: f64,
    h: f64,
    f_load: f64,
    l_span: f64,
    rho: f64,
) -> Result<f64, ModelError> {
    if b <= 0.0 || h <= 0.0 || l_span <= 0.0 {
        return Err(ModelError::Domain(format!(
            "nonpositive beam geometry: b={b}, h={h}, L={l_span}"
        )));
    }
    let w = b * h * h / 6.0;
    let m = f_load * l_span / 4.0 + rho * b * h * l_span * l_span / 8.0;
    Ok(m / w)
}

fn stress_or_collapse(b: f64, h: f64, f_load: f64, l_span: f64) -> f64 {
    if b <= 1e-9 || h <= 1e-9 {
        return f64::MAX / 4.0; // collapsed section counts as failed
    }
    let w = b * h * h / 6.0;
    let m = f_load * l_span / 4.0 + STEEL_DENSITY_N_PER_M3 * b * h * l_span * l_span / 8.0;
    m / w
}

/// Bivariate normal log-density with correlation `CORR_BH` between b and h.
fn ln_bivariate(db: f64, dh: f64, sig_b: f64, sig_h: f64) -> f64 {
    let r2 = 1.0 - CORR_BH * CORR_BH;
    let zb = db / sig_b;
    let zh = dh / sig_h;
    let quad = (zb * zb - 2.0 * CORR_BH * zb * zh + zh * zh) / r2;
    -LN_2PI - (sig_b * sig_h).ln() - 0.5 * r2.ln() - 0.5 * quad
}

/// Posterior failure-probability benchmark on the four hyperparameters
/// `(mu_b, mu_h, sigma_b, sigma_h)`. The failure model marginalizes the
/// section dimensions and loads with a fixed common-random-number inner
/// sample, so the forward evaluation returns a conditional failure
/// probability rather than a scalar limit state.
pub fn corroded_beam_problem(
    data: &[(f64, f64)],
    inner_samples: usize,
    seed: u64,
) -> ReliabilityProblem {
    assert!(!data.is_empty(), "need at least one observation pair");
    assert!(inner_samples >= 100);

    let (lf_mu, lf_sig) = lognormal_underlying(LOAD_MEAN_N, LOAD_SD_N);
    let (ll_mu, ll_sig) = lognormal_underlying(SPAN_MEAN_M, SPAN_SD_M);
    let (sb_mu, sb_sig) = lognormal_underlying(SIG_B_MEAN, SIG_B_SD);
    let (sh_mu, sh_sig) = lognormal_underlying(SIG_H_MEAN, SIG_H_SD);

    // common random numbers shared by every conditional-probability call
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(inner_samples);
    for _ in 0..inner_samples {
        let z1 = std_normal(&mut rng);
        let z2 = std_normal(&mut rng);
        let f = (lf_mu + lf_sig * std_normal(&mut rng)).exp();
        let l = (ll_mu + ll_sig * std_normal(&mut rng)).exp();
        draws.push((z1, CORR_BH * z1 + (1.0 - CORR_BH * CORR_BH).sqrt() * z2, f, l));
    }
    let draws = Arc::new(draws);

    let pf_cond: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = {
        let draws = draws.clone();
        Arc::new(move |theta: &[f64]| {
            let (mu_b, mu_h, sig_b, sig_h) = (theta[0], theta[1], theta[2], theta[3]);
            let mut fails = 0usize;
            for &(zb, zh, f, l) in draws.iter() {
                let b = mu_b + sig_b * zb;
                let h = mu_h + sig_h * zh;
                if stress_or_collapse(b, h, f, l) >= BEAM_SIGMA_MAX_PA {
                    fails += 1;
                }
            }
            fails as f64 / draws.len() as f64
        })
    };

    let data_owned: Vec<(f64, f64)> = data.to_vec();
    let log_likelihood: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = Arc::new(move |theta: &[f64]| {
        let (mu_b, mu_h, sig_b, sig_h) = (theta[0], theta[1], theta[2], theta[3]);
        if sig_b <= 0.0 || sig_h <= 0.0 {
            return f64::NEG_INFINITY;
        }
        data_owned
            .iter()
            .map(|&(db, dh)| ln_bivariate(db - mu_b, dh - mu_h, sig_b, sig_h))
            .sum()
    });

    let log_prior: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = Arc::new(move |theta: &[f64]| {
        let (mu_b, mu_h, sig_b, sig_h) = (theta[0], theta[1], theta[2], theta[3]);
        if sig_b <= 0.0 || sig_h <= 0.0 {
            return f64::NEG_INFINITY;
        }
        normal_ln_pdf(mu_b, MU_B_MEAN, MU_B_SD)
            + normal_ln_pdf(mu_h, MU_H_MEAN, MU_H_SD)
            + lognormal_ln_pdf_raw(sig_b, sb_mu, sb_sig)
            + lognormal_ln_pdf_raw(sig_h, sh_mu, sh_sig)
    });

    let from_sn: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> = Arc::new(move |u: &[f64]| {
        vec![
            MU_B_MEAN + MU_B_SD * u[0],
            MU_H_MEAN + MU_H_SD * u[1],
            (sb_mu + sb_sig * u[2]).exp(),
            (sh_mu + sh_sig * u[3]).exp(),
        ]
    });
    let to_sn: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> = Arc::new(move |x: &[f64]| {
        vec![
            (x[0] - MU_B_MEAN) / MU_B_SD,
            (x[1] - MU_H_MEAN) / MU_H_SD,
            (x[2].ln() - sb_mu) / sb_sig,
            (x[3].ln() - sh_mu) / sh_sig,
        ]
    });

    // standard-normal view: 4 hyperparameters + (b, h) pair + (F, L)
    let from_sn_for_lsf = from_sn.clone();
    let sn_lsf: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = Arc::new(move |u: &[f64]| {
        let theta = from_sn_for_lsf(&u[..4]);
        let b = theta[0] + theta[2] * u[4];
        let h = theta[1] + theta[3] * (CORR_BH * u[4] + (1.0 - CORR_BH * CORR_BH).sqrt() * u[5]);
        let f = (lf_mu + lf_sig * u[6]).exp();
        let l = (ll_mu + ll_sig * u[7]).exp();
        BEAM_SIGMA_MAX_PA - stress_or_collapse(b, h, f, l).min(1e12)
    });
    let from_sn_for_lik = from_sn.clone();
    let loglik_for_sn = log_likelihood.clone();
    let sn_log_likelihood: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> =
        Arc::new(move |u: &[f64]| loglik_for_sn(&from_sn_for_lik(&u[..4])));

    // the physical box from the published setup
    let bounds = vec![(0.1, 0.3), (0.015, 0.045), (0.015, 0.045), (0.00225, 0.00675)];

    ReliabilityProblem::from_parts(ProblemParts {
        name: format!("corroded_beam({} observations)", data.len()),
        dim: 4,
        bounds,
        log_prior,
        log_likelihood,
        failure: FailureModel::ConditionalProbability(pf_cond),
        sn_dim: 8,
        sn_lsf,
        sn_log_likelihood,
        to_sn,
        from_sn,
        has_likelihood: true,
    })
}

fn lognormal_ln_pdf_raw(x: f64, mu: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let z = (x.ln() - mu) / sigma;
    -0.5 * z * z - sigma.ln() - x.ln() - 0.5 * LN_2PI
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_coefficient_value() {
        // W = b h^2 / 6 for b = 0.2, h = 0.03
        let w: f64 = 0.2 * 0.03 * 0.03 / 6.0;
        assert!((w - 3e-5).abs() < 1e-18);
    }

    #[test]
    fn stress_by_direct_substitution() {
        // M = 3500*5/4 + 78500*0.2*0.03*25/8 = 4375 + 1471.875
        let sigma = corroded_beam_stress(0.2, 0.03, 3500.0, 5.0).unwrap();
        let m = 4375.0 + 1471.875;
        let want = m / 3e-5;
        assert!((sigma - want).abs() < 1e-6 * want);
        assert!((sigma - 1.949e8).abs() < 5e5, "{sigma}");
        assert!(sigma < BEAM_SIGMA_MAX_PA, "prior mean section is safe");
    }

    #[test]
    fn unloaded_weightless_beam_is_stress_free() {
        let sigma = corroded_beam_stress_with_density(0.2, 0.03, 0.0, 5.0, 0.0).unwrap();
        assert_eq!(sigma, 0.0);
    }

    #[test]
    fn nonpositive_geometry_is_domain_error() {
        assert!(corroded_beam_stress(0.0, 0.03, 100.0, 5.0).is_err());
        assert!(corroded_beam_stress(0.2, -0.1, 100.0, 5.0).is_err());
    }

    #[test]
    fn stress_monotone_decreasing_in_section() {
        let base = corroded_beam_stress(0.2, 0.03, 3500.0, 5.0).unwrap();
        let wider = corroded_beam_stress(0.21, 0.03, 3500.0, 5.0).unwrap();
        let taller = corroded_beam_stress(0.2, 0.0315, 3500.0, 5.0).unwrap();
        assert!(wider < base);
        assert!(taller < base);
    }

    #[test]
    fn likelihood_peaks_at_data() {
        let p = corroded_beam_problem(&[BEAM_DATA_FIRST], 200, 1);
        // with tiny sigma the likelihood dominates at mu == data
        let tight = [BEAM_DATA_FIRST.0, BEAM_DATA_FIRST.1, 0.0151, 0.0023];
        let at_data = p.log_likelihood(&tight);
        for shift in [-0.02, -0.01, 0.01, 0.02] {
            let off = [
                BEAM_DATA_FIRST.0 + shift,
                BEAM_DATA_FIRST.1,
                0.0151,
                0.0023,
            ];
            assert!(p.log_likelihood(&off) < at_data);
        }
    }

    #[test]
    fn conditional_probability_in_unit_interval_and_monotone() {
        let p = corroded_beam_problem(&[BEAM_DATA_FIRST], 2000, 7);
        let healthy = p.eval_failure(&[0.2, 0.03, 0.02, 0.003]).sharp();
        let corroded = p.eval_failure(&[0.14, 0.019, 0.02, 0.003]).sharp();
        assert!((0.0..=1.0).contains(&healthy));
        assert!((0.0..=1.0).contains(&corroded));
        assert!(corroded > healthy, "thinner section must fail more often");
    }

    #[test]
    fn sn_round_trip() {
        let p = corroded_beam_problem(&[BEAM_DATA_FIRST], 200, 1);
        let x = vec![0.21, 0.028, 0.033, 0.005];
        let u = p.to_standard_normal(&x);
        let back = p.from_standard_normal(&u);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
