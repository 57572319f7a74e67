//! Posterior of a plain Monte Carlo estimate, including the case with no
//! observed failures, and posterior expected losses.

use subsim::bayes::{expected_loss_beta, mc_plus};

fn main() -> subsim::Result<()> {
    for (n, total) in [(0, 1000), (3, 1000), (40, 1000)] {
        let post = mc_plus(n, total)?;
        let b = post.params;
        let (lo, hi) = b.credible_interval(0.95)?;
        println!(
            "{n:3}/{total}: mean {:.3e}, 95% [{lo:.2e}, {hi:.2e}]",
            b.mean()
        );
        // Cost of under-designing grows quadratically beyond 1e-2.
        let loss = expected_loss_beta(&b, |p| (p - 1e-2).max(0.0).powi(2))?;
        println!("        expected excess loss {loss:.3e}");
    }
    Ok(())
}
