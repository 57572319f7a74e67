use serde::{Deserialize, Serialize};

use super::special::{beta_reg, log_beta_fn, solve_increasing};
use crate::error::{domain, Result};

/// Parameters of a Be(alpha, beta) distribution on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(domain(
                "BetaParams::new",
                format!("alpha = {alpha}, beta = {beta} must both be positive and finite"),
            ));
        }
        Ok(Self { alpha, beta })
    }

    /// Uniform distribution on [0, 1].
    pub fn uniform() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }

    pub fn ln_norm(&self) -> f64 {
        log_beta_fn(self.alpha, self.beta).expect("validated parameters")
    }

    /// Log density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        let a = self.alpha - 1.0;
        let b = self.beta - 1.0;
        let left = if a == 0.0 { 0.0 } else { a * x.ln() };
        let right = if b == 0.0 { 0.0 } else { b * (-x).ln_1p() };
        left + right - self.ln_norm()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        beta_reg(self.alpha, self.beta, x)
    }

    /// Quantile function, solved by safeguarded Newton on the CDF.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain("BetaParams::quantile", format!("p = {p} not in [0, 1]")));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        if p == 1.0 {
            return Ok(1.0);
        }
        Ok(solve_increasing(
            |x| self.cdf(x) - p,
            |x| self.pdf(x),
            0.0,
            1.0,
            self.mean(),
        ))
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// E[X²].
    pub fn second_moment(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * (self.alpha + 1.0) / (s * (s + 1.0))
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    /// Mode, with the boundary conventions for shapes below one. `None` for
    /// the uniform and U-shaped cases where no unique mode exists.
    pub fn mode(&self) -> Option<f64> {
        let (a, b) = (self.alpha, self.beta);
        if a > 1.0 && b > 1.0 {
            Some((a - 1.0) / (a + b - 2.0))
        } else if b > 1.0 || (a < 1.0 && b == 1.0) {
            Some(0.0)
        } else if a > 1.0 || (a == 1.0 && b < 1.0) {
            Some(1.0)
        } else {
            None
        }
    }

    /// Equal-tailed credible interval with total mass `level`.
    pub fn credible_interval(&self, level: f64) -> Result<(f64, f64)> {
        if !(level > 0.0 && level < 1.0) {
            return Err(domain(
                "BetaParams::credible_interval",
                format!("level = {level} not in (0, 1)"),
            ));
        }
        let tail = 0.5 * (1.0 - level);
        Ok((self.quantile(tail)?, self.quantile(1.0 - tail)?))
    }
}

/// Density of Be(alpha, beta) at `x`.
pub fn beta_pdf(x: f64, params: &BetaParams) -> f64 {
    params.pdf(x)
}
