//! Single-layer transport oracles: uniform and separable targets have
//! closed-form maps, correlated Gaussians have analytic marginals and
//! conditionals, and the squared representation must normalize exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use ttrel_core::GridSpec;
use ttrel_cross::CrossConfig;
use ttrel_transport::build_sirt_layer;

fn cfg(rank: usize, iters: usize, seed: u64) -> CrossConfig {
    let mut c = CrossConfig::new(rank);
    c.iter_max = iters;
    c.tol = 1e-10;
    c.seed = seed;
    c
}

#[test]
fn uniform_target_gives_affine_transport() {
    let grid = GridSpec::uniform(&[(-2.0, 4.0), (0.0, 10.0)], 17).unwrap();
    let (layer, _) = build_sirt_layer(|_x: &[f64]| 1.0, &grid, &cfg(2, 1, 1), 1e-30).unwrap();
    let (x, dens) = layer.irt_invert(&[0.25, 0.7]).unwrap();
    assert!((x[0] - (-2.0 + 0.25 * 6.0)).abs() < 1e-9);
    assert!((x[1] - 7.0).abs() < 1e-9);
    // uniform density over the box
    assert!((dens - 1.0 / 60.0).abs() < 1e-12 / 60.0);
    let u = layer.rosenblatt_forward(&[1.0, 2.5]).unwrap();
    assert!((u[0] - 0.5).abs() < 1e-9);
    assert!((u[1] - 0.25).abs() < 1e-9);
}

#[test]
fn conditional_cdf_endpoints_are_exact() {
    let grid = GridSpec::uniform(&[(-3.0, 3.0), (-3.0, 3.0)], 33).unwrap();
    let (layer, _) = build_sirt_layer(
        |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(),
        &grid,
        &cfg(4, 2, 2),
        1e-30,
    )
    .unwrap();
    assert_eq!(layer.conditional_cdf(0, &[], -3.0).unwrap(), 0.0);
    assert_eq!(layer.conditional_cdf(0, &[], 3.0).unwrap(), 1.0);
    assert_eq!(layer.conditional_cdf(1, &[0.4], -3.0).unwrap(), 0.0);
    assert_eq!(layer.conditional_cdf(1, &[0.4], 3.0).unwrap(), 1.0);
}

#[test]
fn separable_target_conditionals_ignore_prefix() {
    let grid = GridSpec::uniform(&[(-4.0, 4.0), (-4.0, 4.0)], 33).unwrap();
    // product of two different densities
    let (layer, _) = build_sirt_layer(
        |x: &[f64]| (-(x[0] * x[0]) / 2.0).exp() * (-(x[1] - 1.0).powi(2)).exp(),
        &grid,
        &cfg(3, 2, 3),
        1e-30,
    )
    .unwrap();
    for x in [-2.0, -0.5, 0.3, 2.2] {
        let a = layer.conditional_cdf(1, &[-3.0], x).unwrap();
        let b = layer.conditional_cdf(1, &[2.0], x).unwrap();
        assert!((a - b).abs() < 1e-9, "prefix leaked into separable conditional");
    }
}

#[test]
fn correlated_gaussian_marginal_and_conditional_match_analytic() {
    // rho = 0.5; X1 ~ N(0,1), X2 | X1=1 ~ N(0.5, 0.75)
    let n = 129;
    let grid = GridSpec::uniform(&[(-5.0, 5.0), (-5.0, 5.0)], n).unwrap();
    let rho: f64 = 0.5;
    let det = 1.0 - rho * rho;
    let (layer, _) = build_sirt_layer(
        |x: &[f64]| (-(x[0] * x[0] - 2.0 * rho * x[0] * x[1] + x[1] * x[1]) / (2.0 * det)).exp(),
        &grid,
        &cfg(12, 3, 4),
        1e-30,
    )
    .unwrap();

    let std = Normal::standard();
    for i in 1..=9 {
        let x = -2.0 + 4.0 * (i - 1) as f64 / 8.0;
        let got = layer.conditional_cdf(0, &[], x).unwrap();
        let want = std.cdf(x);
        assert!((got - want).abs() < 1e-3, "marginal at {x}: {got} vs {want}");

        let got2 = layer.conditional_cdf(1, &[1.0], x).unwrap();
        let want2 = std.cdf((x - 0.5) / 0.75f64.sqrt());
        assert!((got2 - want2).abs() < 1e-3, "conditional at {x}: {got2} vs {want2}");
    }
}

#[test]
fn one_dimensional_gaussian_median_maps_to_zero() {
    let grid = GridSpec::uniform(&[(-5.0, 5.0)], 65).unwrap();
    let (layer, _) =
        build_sirt_layer(|x: &[f64]| (-(x[0] * x[0]) / 2.0).exp(), &grid, &cfg(1, 1, 5), 1e-30)
            .unwrap();
    let (x, _) = layer.irt_invert(&[0.5]).unwrap();
    assert!(x[0].abs() < 1e-3, "median {x:?}");
}

#[test]
fn forward_invert_round_trip() {
    let grid = GridSpec::uniform(&[(-4.0, 4.0); 3], 33).unwrap();
    let (layer, _) = build_sirt_layer(
        |x: &[f64]| {
            (-(x[0] * x[0] + 0.6 * x[0] * x[1] + x[1] * x[1] + 0.3 * x[1] * x[2] + x[2] * x[2])
                / 2.0)
                .exp()
        },
        &grid,
        &cfg(8, 3, 6),
        1e-30,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.5..3.5)).collect();
        let u = layer.rosenblatt_forward(&x).unwrap();
        let (back, _) = layer.irt_invert(&u).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-6, "{x:?} -> {back:?}");
        }
        // and the opposite direction
        let u2: Vec<f64> = (0..3).map(|_| rng.random_range(0.02..0.98)).collect();
        let (y, _) = layer.irt_invert(&u2).unwrap();
        let roundtrip = layer.rosenblatt_forward(&y).unwrap();
        for (a, b) in u2.iter().zip(&roundtrip) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn conditional_cdf_monotone_and_boundary_errors() {
    let grid = GridSpec::uniform(&[(-4.0, 4.0), (-4.0, 4.0)], 33).unwrap();
    let (layer, _) = build_sirt_layer(
        |x: &[f64]| (-(x[0] * x[0] + 0.8 * x[0] * x[1] + x[1] * x[1]) / 2.0).exp(),
        &grid,
        &cfg(6, 2, 7),
        1e-30,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let prefix = [rng.random_range(-3.9..3.9)];
        let mut last = -1.0;
        for j in 0..=200 {
            let x = -4.0 + 8.0 * j as f64 / 200.0;
            let f = layer.conditional_cdf(1, &prefix, x).unwrap();
            assert!(f >= last, "CDF decreased at {x}");
            last = f;
        }
    }
    assert!(layer.conditional_cdf(1, &[9.0], 0.0).is_err(), "prefix outside box");
    assert!(layer.irt_invert(&[0.0, 0.5]).is_err(), "boundary u rejected");
}

#[test]
fn normalization_exact_against_independent_quadrature() {
    // per-cell 3x3 Simpson is exact for the bi-quadratic cell densities
    let n = 21;
    let grid = GridSpec::uniform(&[(-3.0, 3.0), (-3.0, 3.0)], n).unwrap();
    let (layer, _) = build_sirt_layer(
        |x: &[f64]| (-(x[0] * x[0] + x[0] * x[1] * 0.5 + x[1] * x[1]) / 2.0).exp() + 0.01,
        &grid,
        &cfg(6, 2, 8),
        1e-30,
    )
    .unwrap();
    let nodes: Vec<f64> = grid.nodes(0).to_vec();
    let mut total = 0.0;
    let w1 = [1.0, 4.0, 1.0];
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let (x0, x1) = (nodes[i], nodes[i + 1]);
            let (y0, y1) = (nodes[j], nodes[j + 1]);
            let mut cell = 0.0;
            for (a, wa) in w1.iter().enumerate() {
                for (b, wb) in w1.iter().enumerate() {
                    let x = x0 + (x1 - x0) * a as f64 / 2.0;
                    let y = y0 + (y1 - y0) * b as f64 / 2.0;
                    cell += wa * wb * layer.density(&[x, y]).unwrap();
                }
            }
            total += cell * (x1 - x0) * (y1 - y0) / 36.0;
        }
    }
    assert!((total - 1.0).abs() < 1e-8, "independent quadrature gave {total}");
}

#[test]
fn density_nonnegative_everywhere() {
    let grid = GridSpec::uniform(&[(-4.0, 4.0), (-4.0, 4.0)], 17).unwrap();
    // a wiggly target the square keeps nonnegative even where the sqrt
    // interpolant crosses zero
    let (layer, _) = build_sirt_layer(
        |x: &[f64]| ((x[0] * 1.3).sin() + 1.0001) * ((x[1] * 0.9).cos() + 1.0001),
        &grid,
        &cfg(4, 2, 9),
        1e-30,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100_000 {
        let x = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        assert!(layer.density(&x).unwrap() >= 0.0);
    }
}

#[test]
fn nonpositive_target_is_domain_error() {
    let grid = GridSpec::uniform(&[(-1.0, 1.0), (-1.0, 1.0)], 9).unwrap();
    let r = build_sirt_layer(|x: &[f64]| x[0], &grid, &cfg(2, 1, 13), 1e-30);
    assert!(matches!(r, Err(ttrel_transport::TransportError::Domain(_))));
}
