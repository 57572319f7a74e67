//! Total coefficient of variation as a function of the conditional level
//! probability for a fixed budget, and its minimizer.

use subsim::sss::{cov_vs_p0, optimal_p0};

fn main() -> subsim::Result<()> {
    let (pf, n_total) = (1e-3, 2000.0);
    print!("  p0 ");
    let gammas = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0];
    for g in gammas {
        print!("  g={g:<4}");
    }
    println!();
    for i in 1..=9 {
        let p0 = 0.05 * i as f64;
        print!("{p0:5.2}");
        for g in gammas {
            print!("  {:6.3}", cov_vs_p0(pf, n_total, g, p0)?);
        }
        println!();
    }
    println!("optimum p0 = {:.4}", optimal_p0(pf, n_total, 4.0)?);
    Ok(())
}
