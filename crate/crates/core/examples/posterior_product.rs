//! Exact density of a product of beta posteriors against its
//! moment-matched beta, with a quadrature cross-check for two factors.

use subsim::bayes::{fan_approximation, posteriors_from_counts, rohatgi_oracle, ProductPdf};

fn main() -> subsim::Result<()> {
    let levels = posteriors_from_counts([(12, 40), (9, 40)])?;
    let params: Vec<_> = levels.iter().map(|l| l.params).collect();
    let exact = ProductPdf::new(&params)?;
    let fan = fan_approximation(&levels)?;
    println!("fan beta a = {:.3}, b = {:.3}", fan.alpha, fan.beta);
    println!("     y       series        oracle        fan");
    for i in 1..=12 {
        let y = 0.01 * i as f64;
        let s = exact.pdf(y)?;
        let o = rohatgi_oracle(|x| params[0].pdf(x), |x| params[1].pdf(x), y)?.value;
        println!("{y:6.2} {s:12.6} {o:13.6} {:10.6}", fan.pdf(y));
    }
    Ok(())
}
