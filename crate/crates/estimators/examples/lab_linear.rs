// scratch experiment: DIRT on the linear LSF across dimensions/alphas
use std::time::Instant;
use ttrel_estimators::{build_prior_failure_map, estimate_prior_pf, EstimatorOptions};
use ttrel_models::linear_problem;
use ttrel_transport::{DirtConfig, ReferenceDensity, TemperingSchedule};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let d: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let alpha: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3.5);
    let rank: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(4);
    let layers: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(12);
    let n: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let iters: usize = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(2);
    let nodes: usize = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(33);

    let problem = linear_problem(d, alpha);
    let schedule = TemperingSchedule::geometric(1e-4, layers).unwrap();
    let reference = ReferenceDensity::default_box();
    let cfg = DirtConfig {
        max_rank: rank,
        grid_nodes: nodes,
        cross_iter_max: iters,
        seed: 12345,
        ..Default::default()
    };

    let t0 = Instant::now();
    let map = build_prior_failure_map(&problem, 1000.0, &schedule, &reference, &cfg).unwrap();
    let t_build = t0.elapsed().as_secs_f64();
    let build_evals = problem.lsf_count();

    let opts = EstimatorOptions { n_samples: n, reps: 10, seed: 99, gamma: 1000.0 };
    let t1 = Instant::now();
    let rep = estimate_prior_pf(&map, &problem, &opts).unwrap();
    let t_est = t1.elapsed().as_secs_f64();

    use statrs::distribution::{ContinuousCDF, Normal};
    let want = Normal::standard().cdf(-alpha);
    println!(
        "d={d} alpha={alpha} r={rank} L={layers} n={nodes} it={iters}: est {:.4e} (want {:.4e}, rel {:+.4}) cov {:.4} | build {:.1}s ({} evals) est {:.1}s ({} evals)",
        rep.estimate,
        want,
        rep.estimate / want - 1.0,
        rep.cov,
        t_build,
        build_evals,
        t_est,
        rep.lsf_evals,
    );
}
