// accuracy/CoV sweep for the linear benchmark at higher dimension
use std::time::Instant;
use ttrel_estimators::{build_prior_failure_map, estimate_prior_pf, EstimatorOptions};
use ttrel_models::linear_problem;
use ttrel_transport::{DirtConfig, ReferenceDensity, TemperingSchedule};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let d: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(25);
    let alpha: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3.5);
    use statrs::distribution::{ContinuousCDF, Normal};
    let want = Normal::standard().cdf(-alpha);
    let reference = ReferenceDensity::default_box();

    for (layers, rank, nodes, iters, gamma, n_samp) in [
        (4usize, 4usize, 33usize, 1usize, 30.0f64, 2000usize),
        (4, 6, 33, 1, 30.0, 2000),
        (6, 4, 33, 1, 30.0, 2000),
        (6, 6, 33, 1, 30.0, 2000),
        (4, 6, 33, 2, 30.0, 2000),
    ] {
        let problem = linear_problem(d, alpha);
        let schedule = TemperingSchedule::geometric(1e-4, layers).unwrap();
        let cfg = DirtConfig {
            max_rank: rank,
            grid_nodes: nodes,
            cross_iter_max: iters,
            seed: 12345,
            ..Default::default()
        };
        let t0 = Instant::now();
        let map = build_prior_failure_map(&problem, gamma, &schedule, &reference, &cfg).unwrap();
        let tb = t0.elapsed().as_secs_f64();
        let build_evals = problem.lsf_count();
        let opts = EstimatorOptions { n_samples: n_samp, reps: 10, seed: 99, gamma };
        let t1 = Instant::now();
        let rep = estimate_prior_pf(&map, &problem, &opts).unwrap();
        let te = t1.elapsed().as_secs_f64();
        println!(
            "d={d} L={layers:2} r={rank} n={nodes} it={iters} g={gamma:4.0}: est {:.3e} rel {:+.3} cov {:.4} | build {tb:.0}s/{} est {te:.0}s",
            rep.estimate,
            rep.estimate / want - 1.0,
            rep.cov,
            build_evals
        );
    }
}
