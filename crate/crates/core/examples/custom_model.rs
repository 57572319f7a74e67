//! Any `Fn(&[f64]) -> f64` can serve as a performance function. Here a
//! series system fails when either of two linear modes exceeds its limit.

use subsim::bayes::summarize_run;
use subsim::model::PerformanceModel;
use subsim::sss::{run_subset_simulation, AdaptiveScaling, Scaling, SsConfig};

fn main() -> subsim::Result<()> {
    let d = 20;
    let s = (d as f64).sqrt();
    let model = PerformanceModel::new("series", d, 3.5, move |t: &[f64]| {
        let a = t.iter().sum::<f64>() / s;
        let b = (t[0] - t[1]) / 2f64.sqrt();
        a.max(b)
    })?;

    let scaling = Scaling::Adaptive(AdaptiveScaling {
        band: [0.35, 0.45],
        ..AdaptiveScaling::default()
    });
    let cfg = SsConfig::new(0.1, 2000).with_seed(11).with_scaling(scaling);
    let r = run_subset_simulation(&model, &cfg)?;
    let post = summarize_run(&r)?;

    // Two independent standard normal margins, so 1 - (1 - q)^2 exactly.
    let q = subsim::math::std_normal_sf(3.5);
    println!("estimate  {:.3e}  (m = {})", r.p_hat, r.m);
    println!("posterior {:.3e} +- {:.1}%", post.mean, 100.0 * post.cov);
    println!("exact     {:.3e}", 1.0 - (1.0 - q) * (1.0 - q));
    println!("model evaluations {}", model.evaluations());
    Ok(())
}
