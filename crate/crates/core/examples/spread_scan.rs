//! Correlation factor and acceptance rate of the conditional chains as a
//! function of the proposal spread, at one isolated level.

use subsim::model::ball_problem;
use subsim::sss::{optimal_spread_scan, SpreadScanConfig};

fn main() -> subsim::Result<()> {
    let model = ball_problem(100, 1e-3)?;
    let sigmas = vec![0.1, 0.3, 0.6, 0.9, 1.2, 1.6, 2.0];
    let mut cfg = SpreadScanConfig::new(1, sigmas, 500, 10);
    cfg.master_seed = 5;
    let table = optimal_spread_scan(&model, &cfg)?;
    println!("sigma   gamma    rho");
    for r in &table.rows {
        println!(
            "{:5.2} {:>7} {:6.3}",
            r.sigma,
            r.gamma.map_or("-".into(), |g| format!("{g:.2}")),
            r.acceptance_rate
        );
    }
    println!("argmin sigma = {:?}", table.argmin);
    Ok(())
}
