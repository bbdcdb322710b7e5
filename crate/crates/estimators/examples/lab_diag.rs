// d=25: ESS progression over schedule prefixes
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttrel_estimators::log_smooth_failure;
use ttrel_models::linear_problem;
use ttrel_transport::{dirt_build, DirtConfig, ReferenceDensity, TemperingSchedule};

fn main() {
    let d = 25usize;
    let alpha = 3.5;
    let gamma = 100.0;
    let problem = linear_problem(d, alpha);
    let reference = ReferenceDensity::default_box();
    let full = TemperingSchedule::geometric(1e-4, 4).unwrap();
    let p = problem.clone();
    let log_target = move |x: &[f64]| {
        let fv = p.eval_failure(x);
        log_smooth_failure(fv, gamma) + p.log_prior(x)
    };

    for upto in 1..=full.betas().len() {
        let betas: Vec<f64> = full.betas()[..upto].to_vec();
        let beta_last = *betas.last().unwrap();
        let rescaled: Vec<f64> = betas.iter().map(|b| b / beta_last).collect();
        let sched = TemperingSchedule::new(rescaled).unwrap();
        let cfg = DirtConfig { max_rank: 4, grid_nodes: 33, cross_iter_max: 2, seed: 12345, ..Default::default() };
        let lt = &log_target;
        let scaled = move |x: &[f64]| beta_last * lt(x);
        let map = dirt_build(&problem.bounds, scaled, &sched, &reference, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1000;
        let mut lw = Vec::with_capacity(n);
        let mut mean_g = 0.0;
        for _ in 0..n {
            let u = map.sample_reference(&mut rng);
            let (x, logp) = map.sample(&u).unwrap();
            lw.push(beta_last * log_target(&x) - logp);
            mean_g += (alpha - x.iter().sum::<f64>() / (d as f64).sqrt()) / n as f64;
        }
        let mx = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = lw.iter().map(|w| (w - mx).exp()).sum();
        let s2: f64 = lw.iter().map(|w| (2.0 * (w - mx)).exp()).sum();
        println!(
            "prefix {upto} (beta {beta_last:.1e}): ESS {:7.1}/1000  mean g = {mean_g:+.2}",
            s * s / s2
        );
    }
}
