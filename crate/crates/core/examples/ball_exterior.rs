//! The exterior of a ball: a nonlinear failure domain with a chi-square
//! exact answer. Repeats a few runs and compares with the truth.

use subsim::model::ball_problem;
use subsim::sss::{run_subset_simulation, SsConfig};

fn main() -> subsim::Result<()> {
    let model = ball_problem(50, 1e-4)?;
    let pf = model.exact_pf().unwrap();
    let mut estimates = Vec::new();
    for seed in 0..10 {
        let r = run_subset_simulation(&model, &SsConfig::new(0.1, 1000).with_seed(seed))?;
        println!("seed {seed}: {:.3e} ({} levels)", r.p_hat, r.m);
        estimates.push(r.p_hat);
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    println!("mean {mean:.3e} vs exact {pf:.3e}");
    Ok(())
}
