//! Subset Simulation on the half-space benchmark in 1000 dimensions,
//! followed by the posterior of the failure probability.
//!
//! cargo run --release --example linear_reliability [seed]

use subsim::bayes::summarize_run;
use subsim::model::linear_problem;
use subsim::sss::{run_subset_simulation, SsConfig};

fn main() -> subsim::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let model = linear_problem(1000, 1e-3)?;
    let result = run_subset_simulation(&model, &SsConfig::new(0.1, 1000).with_seed(seed))?;

    println!("threshold b = {:.4}, exact pF = 1e-3", model.threshold());
    println!(" j      b_j     n_j  rho_j  gamma_j");
    for (j, l) in result.levels.iter().enumerate() {
        println!(
            "{:2} {:8.4} {:7} {:>6} {:>8}",
            j + 1,
            l.threshold,
            l.n,
            l.acceptance_rate.map_or("-".into(), |r| format!("{r:.3}")),
            l.gamma.map_or("-".into(), |g| format!("{g:.3}")),
        );
    }
    println!("estimate {:.4e} from {} evaluations", result.p_hat, result.total_evaluations);

    let post = summarize_run(&result)?;
    println!(
        "posterior mean {:.4e}, cov {:.3}, MAP {:.4e}, 95% interval [{:.3e}, {:.3e}]",
        post.mean, post.cov, post.map, post.credible_95.0, post.credible_95.1
    );
    Ok(())
}
