//! Repeated runs from a configuration, comparing the spread of the
//! estimates with the average posterior coefficient of variation.

use subsim::app::{run_study, RunConfig};
use subsim::math::derive_seed;

const CONFIG: &str = r#"
seed = 2024
[problem]
name = "linear"
d = 100
pf_target = 1e-3
[ss]
p0 = 0.1
n = 500
"#;

fn main() -> Result<(), subsim::app::AppError> {
    let config = RunConfig::from_toml_str(CONFIG)?;
    let seeds: Vec<u64> = (0..20).map(|i| derive_seed(config.seed, i)).collect();
    let report = run_study(&config, &seeds)?;
    println!("runs completed       {}", report.completed);
    println!("mean estimate        {:.3e}", report.mean_estimate);
    println!("frequentist cov      {:.3}", report.frequentist_cov);
    println!("mean posterior cov   {:.3}", report.mean_posterior_cov);
    println!("levels per run       {:?}", report.level_counts);
    Ok(())
}
