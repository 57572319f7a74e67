use crate::error::{domain, Result};
use crate::math::quadrature::{integrate, Integral};

/// Density of `X₁X₂` for independent `X₁ ~ f1`, `X₂ ~ f2` on `[0, 1]`:
/// `∫_y^1 f1(x) f2(y/x) / x dx`, by adaptive quadrature to `1e-8` relative.
pub fn rohatgi_oracle<F1, F2>(f1: F1, f2: F2, y: f64) -> Result<Integral>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    if !(y > 0.0 && y < 1.0) {
        return Err(domain("rohatgi_oracle", format!("y = {y} not in (0, 1)")));
    }
    integrate(|x| f1(x) * f2(y / x) / x, y, 1.0, 1e-8, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::BetaParams;

    #[test]
    fn uniform_product_is_minus_log() {
        for y in [0.01, 0.2, 0.5, 0.9] {
            let r = rohatgi_oracle(|_| 1.0, |_| 1.0, y).unwrap();
            assert!((r.value + y.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn commutative() {
        let a = BetaParams::new(3.0, 2.0).unwrap();
        let b = BetaParams::new(2.0, 4.0).unwrap();
        for y in [0.05, 0.3, 0.6] {
            let ab = rohatgi_oracle(|x| a.pdf(x), |x| b.pdf(x), y).unwrap().value;
            let ba = rohatgi_oracle(|x| b.pdf(x), |x| a.pdf(x), y).unwrap().value;
            assert!((ab - ba).abs() < 1e-8 * ab.abs().max(1.0));
        }
    }
}
