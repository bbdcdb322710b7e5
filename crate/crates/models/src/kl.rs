use nalgebra::DMatrix;

use crate::ModelError;

/// Covariance kernels for the 1-D field eigenproblem.
#[derive(Debug, Clone, Copy)]
pub enum KernelSpec {
    /// `C(x, x') = sigma^2 exp(-|x - x'| / corr_len)`
    Exponential { sigma: f64, corr_len: f64 },
    /// `C(x, x') = sigma^2` (rank one)
    Constant { sigma: f64 },
}

impl KernelSpec {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            KernelSpec::Exponential { sigma, corr_len } => {
                sigma * sigma * (-(x - y).abs() / corr_len).exp()
            }
            KernelSpec::Constant { sigma } => sigma * sigma,
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            KernelSpec::Exponential { sigma, .. } => sigma,
            KernelSpec::Constant { sigma } => sigma,
        }
    }
}

/// Truncated Karhunen-Loeve representation of a 1-D random field, built by
/// Nystrom discretization of the covariance eigenproblem with trapezoid
/// weights. Eigenfunctions are orthonormal under the quadrature inner
/// product `sum_j w_j phi_a(x_j) phi_b(x_j)`.
#[derive(Debug, Clone)]
pub struct KlField {
    pub mesh: Vec<f64>,
    pub weights: Vec<f64>,
    /// Nonincreasing, nonnegative; length `M`.
    pub eigenvalues: Vec<f64>,
    /// `eigenfunctions[i]` sampled on the mesh.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// Constant mean level of the field.
    pub mean: f64,
    pub sigma: f64,
    /// Sum of the full discrete spectrum (before truncation).
    pub total_variance: f64,
}

pub fn kl_expand(
    kernel: KernelSpec,
    length: f64,
    n_mesh: usize,
    m: usize,
) -> Result<KlField, ModelError> {
    if n_mesh < 2 {
        return Err(ModelError::Domain("mesh needs at least 2 nodes".into()));
    }
    if m == 0 || m > n_mesh {
        return Err(ModelError::Domain(format!(
            "truncation {m} must be in 1..={n_mesh}"
        )));
    }
    let h = length / (n_mesh - 1) as f64;
    let mesh: Vec<f64> = (0..n_mesh).map(|i| i as f64 * h).collect();
    let mut weights = vec![h; n_mesh];
    weights[0] = 0.5 * h;
    weights[n_mesh - 1] = 0.5 * h;

    // symmetrized Nystrom matrix B = W^{1/2} C W^{1/2}
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let b = DMatrix::from_fn(n_mesh, n_mesh, |i, j| {
        sqrt_w[i] * kernel.eval(mesh[i], mesh[j]) * sqrt_w[j]
    });
    let eig = b.symmetric_eigen();

    let mut order: Vec<usize> = (0..n_mesh).collect();
    order.sort_by(|&a, &bb| {
        eig.eigenvalues[bb]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let total_variance: f64 = eig.eigenvalues.iter().sum();
    let scale = eig.eigenvalues[order[0]].abs().max(1e-300);

    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenfunctions = Vec::with_capacity(m);
    for &oi in order.iter().take(m) {
        let lam = eig.eigenvalues[oi];
        if lam < -1e-10 * scale.max(1.0) {
            return Err(ModelError::Numerical(format!(
                "negative eigenvalue {lam} in covariance spectrum"
            )));
        }
        eigenvalues.push(lam.max(0.0));
        let col = eig.eigenvectors.column(oi);
        let mut phi: Vec<f64> = (0..n_mesh).map(|j| col[j] / sqrt_w[j]).collect();
        // deterministic sign: largest-magnitude entry positive
        let lead = phi
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        if phi[lead] < 0.0 {
            phi.iter_mut().for_each(|v| *v = -*v);
        }
        eigenfunctions.push(phi);
    }

    Ok(KlField {
        mesh,
        weights,
        eigenvalues,
        eigenfunctions,
        mean: 0.0,
        sigma: kernel.sigma(),
        total_variance,
    })
}

impl KlField {
    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    /// `mean + sum_i sqrt(lambda_i) phi_i(x) xi_i` on the mesh.
    pub fn realize(&self, xi: &[f64]) -> Vec<f64> {
        assert_eq!(xi.len(), self.modes(), "coefficient count must equal M");
        let mut field = vec![self.mean; self.mesh.len()];
        for (i, &x) in xi.iter().enumerate() {
            let s = self.eigenvalues[i].sqrt() * x;
            if s == 0.0 {
                continue;
            }
            for (f, &p) in field.iter_mut().zip(&self.eigenfunctions[i]) {
                *f += s * p;
            }
        }
        field
    }

    /// Lognormal variant: exponentiates a realization of the underlying
    /// Gaussian field (whose mean/sigma this expansion carries).
    pub fn realize_lognormal(&self, xi: &[f64]) -> Vec<f64> {
        self.realize(xi).into_iter().map(f64::exp).collect()
    }

    /// Pointwise truncated variance `sum_i lambda_i phi_i(x)^2`.
    pub fn variance_at(&self, node: usize) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenfunctions)
            .map(|(l, phi)| l * phi[node] * phi[node])
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trace_identity_exponential_kernel() {
        let n = 101;
        let kl = kl_expand(KernelSpec::Exponential { sigma: 1.0, corr_len: 2.0 }, 2.0, n, n)
            .unwrap();
        // sum of the full spectrum equals integral of C(x,x) = sigma^2 * length
        let trace: f64 = kl.total_variance;
        assert!((trace - 2.0).abs() / 2.0 < 0.01, "trace {trace}");
        // nonincreasing
        for w in kl.eigenvalues.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        // truncated sum below the trace bound
        let partial: f64 = kl.eigenvalues.iter().take(10).sum();
        assert!(partial <= trace + 1e-9);
    }

    #[test]
    fn full_spectrum_reconstructs_covariance() {
        let n = 41;
        let kernel = KernelSpec::Exponential { sigma: 0.7, corr_len: 1.3 };
        let kl = kl_expand(kernel, 2.0, n, n).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut c = 0.0;
                for (l, phi) in kl.eigenvalues.iter().zip(&kl.eigenfunctions) {
                    c += l * phi[i] * phi[j];
                }
                worst = worst.max((c - kernel.eval(kl.mesh[i], kl.mesh[j])).abs());
            }
        }
        assert!(worst < 1e-6, "covariance reconstruction error {worst}");
    }

    #[test]
    fn constant_kernel_is_rank_one() {
        let kl = kl_expand(KernelSpec::Constant { sigma: 2.0 }, 2.0, 51, 3).unwrap();
        // one nonzero eigenvalue sigma^2 * length with a flat eigenfunction
        assert!((kl.eigenvalues[0] - 8.0).abs() < 1e-8, "{}", kl.eigenvalues[0]);
        assert!(kl.eigenvalues[1].abs() < 1e-8);
        let phi = &kl.eigenfunctions[0];
        let spread = phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - phi.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-8);
    }

    #[test]
    fn eigenfunctions_orthonormal_under_quadrature() {
        let n = 61;
        let kl = kl_expand(KernelSpec::Exponential { sigma: 1.0, corr_len: 0.5 }, 2.0, n, 12)
            .unwrap();
        for a in 0..12 {
            for b in 0..12 {
                let dot: f64 = (0..n)
                    .map(|j| kl.weights[j] * kl.eigenfunctions[a][j] * kl.eigenfunctions[b][j])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-8, "({a},{b}) -> {dot}");
            }
        }
    }

    #[test]
    fn realization_mean_and_variance() {
        let kl = kl_expand(KernelSpec::Exponential { sigma: 1.5, corr_len: 1.0 }, 2.0, 81, 20)
            .unwrap()
            .with_mean(3.0);
        // xi = 0 gives the mean field
        assert!(kl.realize(&vec![0.0; 20]).iter().all(|&v| v == 3.0));
        // +xi and -xi average to the mean exactly
        let xi: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        let up = kl.realize(&xi);
        let dn = kl.realize(&neg);
        for (u, d) in up.iter().zip(&dn) {
            assert!((0.5 * (u + d) - 3.0).abs() < 1e-12);
        }
        // MC variance at a mesh point matches the truncated spectrum
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let node = 40;
        let n_samp = 10_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..n_samp {
            let xi: Vec<f64> = (0..20).map(|_| normal_draw(&mut rng)).collect();
            let v = kl.realize(&xi)[node];
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / n_samp as f64;
        let var = acc2 / n_samp as f64 - mean * mean;
        let want = kl.variance_at(node);
        assert!((var - want).abs() / want < 0.05, "var {var} vs {want}");
    }

    fn normal_draw(rng: &mut ChaCha8Rng) -> f64 {
        // Box-Muller is plenty for a variance check
        let u1: f64 = rng.random::<f64>().max(1e-12);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
