//! Exact density of a product of independent beta variables as a power
//! series in `1 − y`.

use std::sync::RwLock;

use crate::error::{domain, Error, Result};
use crate::math::special::ln_gamma;
use crate::math::BetaParams;

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 5000;
/// Default relative truncation tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
const QUIET_TERMS: usize = 3;

/// A signed number stored as `sign · exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogNum {
    ln_abs: f64,
    sign: i8,
}

impl LogNum {
    const ZERO: LogNum = LogNum {
        ln_abs: f64::NEG_INFINITY,
        sign: 0,
    };
}

/// Kahan-compensated sum of signed log-magnitude terms.
fn log_sum(terms: impl Iterator<Item = LogNum> + Clone) -> LogNum {
    let max = terms
        .clone()
        .filter(|t| t.sign != 0)
        .map(|t| t.ln_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogNum::ZERO;
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms.filter(|t| t.sign != 0) {
        let v = t.sign as f64 * (t.ln_abs - max).exp() - comp;
        let s = sum + v;
        comp = (s - sum) - v;
        sum = s;
    }
    if sum == 0.0 {
        return LogNum::ZERO;
    }
    LogNum {
        ln_abs: sum.abs().ln() + max,
        sign: if sum > 0.0 { 1 } else { -1 },
    }
}

/// `(c)_s / s!` for `s = 0..len` in log-magnitude form.
fn pochhammer_over_factorial(c: f64, len: usize) -> Vec<LogNum> {
    let mut out = Vec::with_capacity(len);
    let mut cur = LogNum { ln_abs: 0.0, sign: 1 };
    for s in 0..len {
        out.push(cur);
        let f = c + s as f64;
        if f == 0.0 || cur.sign == 0 {
            cur = LogNum::ZERO;
        } else {
            cur = LogNum {
                ln_abs: cur.ln_abs + f.abs().ln() - ((s + 1) as f64).ln(),
                sign: cur.sign * if f > 0.0 { 1 } else { -1 },
            };
        }
    }
    out
}

/// Density of `Y = X_1 ⋯ X_m` with independent `X_j ~ Be(a_j, b_j)`.
///
/// Factors are reordered by decreasing `a`, so the smallest `a` carries the
/// `y^{a−1}` behaviour at the origin. Series coefficients are computed once
/// and extended on demand; the struct can be shared across threads.
#[derive(Debug)]
pub struct ProductPdf {
    factors: Vec<BetaParams>,
    ln_const: f64,
    a_last: f64,
    b_total: f64,
    rel_tol: f64,
    coeffs: RwLock<Vec<LogNum>>,
}

impl ProductPdf {
    pub fn new(factors: &[BetaParams]) -> Result<Self> {
        Self::with_tolerance(factors, DEFAULT_REL_TOL)
    }

    pub fn with_tolerance(factors: &[BetaParams], rel_tol: f64) -> Result<Self> {
        if factors.is_empty() {
            return Err(domain("ProductPdf::new", "at least one factor is required"));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(domain("ProductPdf::new", format!("rel_tol = {rel_tol}")));
        }
        let mut factors = factors.to_vec();
        factors.sort_by(|x, y| y.alpha.total_cmp(&x.alpha));
        let ln_const = factors
            .iter()
            .map(|f| ln_gamma(f.alpha + f.beta) - ln_gamma(f.alpha))
            .sum();
        let a_last = factors.last().expect("non-empty").alpha;
        let b_total = factors.iter().map(|f| f.beta).sum();
        Ok(Self {
            factors,
            ln_const,
            a_last,
            b_total,
            rel_tol,
            coeffs: RwLock::new(Vec::new()),
        })
    }

    pub fn factors(&self) -> &[BetaParams] {
        &self.factors
    }

    /// Coefficients `σ_r^{(m)}` for `r < len`.
    fn compute(&self, len: usize) -> Vec<LogNum> {
        let first = &self.factors[0];
        let mut sigma = vec![LogNum::ZERO; len];
        sigma[0] = LogNum {
            ln_abs: -ln_gamma(first.beta),
            sign: 1,
        };
        let mut b_prev = first.beta;
        for k in 1..self.factors.len() {
            let fk = &self.factors[k];
            let c = fk.alpha + fk.beta - self.factors[k - 1].alpha;
            let b_k = b_prev + fk.beta;
            let poch = pochhammer_over_factorial(c, len);
            let next: Vec<LogNum> = (0..len)
                .map(|r| {
                    let conv = log_sum((0..=r).map(|s| LogNum {
                        ln_abs: poch[s].ln_abs + sigma[r - s].ln_abs,
                        sign: poch[s].sign * sigma[r - s].sign,
                    }));
                    if conv.sign == 0 {
                        return LogNum::ZERO;
                    }
                    let rf = r as f64;
                    LogNum {
                        ln_abs: conv.ln_abs + ln_gamma(b_prev + rf) - ln_gamma(b_k + rf),
                        sign: conv.sign,
                    }
                })
                .collect();
            sigma = next;
            b_prev = b_k;
        }
        sigma
    }

    fn coefficients(&self, len: usize) -> Vec<LogNum> {
        {
            let c = self.coeffs.read().expect("coefficient cache poisoned");
            if c.len() >= len {
                return c[..len].to_vec();
            }
        }
        let mut c = self.coeffs.write().expect("coefficient cache poisoned");
        if c.len() < len {
            *c = self.compute(len);
        }
        c[..len].to_vec()
    }

    /// Density at `y ∈ (0, 1)`.
    pub fn pdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y < 1.0) {
            return Err(domain("ProductPdf::pdf", format!("y = {y} not in (0, 1)")));
        }
        let ln_q = (-y).ln_1p();
        let mut len = 64.min(MAX_TERMS);
        loop {
            let coeffs = self.coefficients(len);
            match self.series(&coeffs, ln_q) {
                Some((scale, value)) => {
                    let ln_pre = self.ln_const
                        + (self.a_last - 1.0) * y.ln()
                        + (self.b_total - 1.0) * ln_q;
                    return Ok((value * (ln_pre + scale).exp()).max(0.0));
                }
                None if len >= MAX_TERMS => {
                    let (scale, value, last) = self.partial(&coeffs, ln_q);
                    let ln_pre =
                        self.ln_const + (self.a_last - 1.0) * y.ln() + (self.b_total - 1.0) * ln_q;
                    return Err(Error::Truncation {
                        terms: len,
                        partial_sum: value * (ln_pre + scale).exp(),
                        last_relative: last,
                    });
                }
                None => len = (len * 4).min(MAX_TERMS),
            }
        }
    }

    /// Sum of `σ_r (1 − y)^r` as `(log scale, value)`, or `None` when the
    /// stopping rule was not met within the available coefficients.
    fn series(&self, coeffs: &[LogNum], ln_q: f64) -> Option<(f64, f64)> {
        let mut acc = Accumulator::default();
        let mut quiet = 0;
        for (r, c) in coeffs.iter().enumerate() {
            let rel = acc.add(*c, r as f64 * ln_q);
            if rel < self.rel_tol {
                quiet += 1;
                if quiet >= QUIET_TERMS {
                    return Some((acc.scale, acc.value()));
                }
            } else {
                quiet = 0;
            }
        }
        None
    }

    fn partial(&self, coeffs: &[LogNum], ln_q: f64) -> (f64, f64, f64) {
        let mut acc = Accumulator::default();
        let mut last = f64::NAN;
        for (r, c) in coeffs.iter().enumerate() {
            last = acc.add(*c, r as f64 * ln_q);
        }
        (acc.scale, acc.value(), last)
    }
}

/// Running sum `exp(scale) · (sum + comp)` that rescales when a term
/// dominates the current scale.
struct Accumulator {
    scale: f64,
    sum: f64,
    comp: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self {
            scale: f64::NEG_INFINITY,
            sum: 0.0,
            comp: 0.0,
        }
    }
}

impl Accumulator {
    fn value(&self) -> f64 {
        self.sum
    }

    /// Adds `c · exp(ln_w)` and returns `|term| / |sum|` after the addition.
    fn add(&mut self, c: LogNum, ln_w: f64) -> f64 {
        if c.sign == 0 {
            return 0.0;
        }
        let ln_t = c.ln_abs + ln_w;
        if ln_t == f64::NEG_INFINITY {
            return 0.0;
        }
        if self.scale == f64::NEG_INFINITY || ln_t > self.scale + 300.0 {
            let shift = if self.scale == f64::NEG_INFINITY {
                0.0
            } else {
                (self.scale - ln_t).exp()
            };
            self.sum *= shift;
            self.comp *= shift;
            self.scale = ln_t;
        }
        let t = c.sign as f64 * (ln_t - self.scale).exp();
        let v = t - self.comp;
        let s = self.sum + v;
        self.comp = (s - self.sum) - v;
        self.sum = s;
        if self.sum == 0.0 {
            f64::INFINITY
        } else {
            t.abs() / self.sum.abs()
        }
    }
}

/// Exact density of the product of the given beta variables at `y`.
///
/// Builds the series from scratch; use [`ProductPdf`] to evaluate many
/// points.
pub fn exact_product_pdf(factors: &[BetaParams], y: f64, rel_tol: f64) -> Result<f64> {
    ProductPdf::with_tolerance(factors, rel_tol)?.pdf(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_factor_is_the_beta_density() {
        let b = BetaParams::new(3.5, 7.0).unwrap();
        let p = ProductPdf::new(&[b]).unwrap();
        for y in [0.2, 0.5, 0.8] {
            let v = p.pdf(y).unwrap();
            assert!((v - b.pdf(y)).abs() <= 1e-10 * b.pdf(y), "{y}: {v}");
        }
    }

    #[test]
    fn two_uniforms_give_minus_log() {
        let u = BetaParams::uniform();
        let p = ProductPdf::new(&[u, u]).unwrap();
        for y in [0.05, 0.3, 0.7, 0.95] {
            let v = p.pdf(y).unwrap();
            assert!((v + y.ln()).abs() < 1e-7 * y.ln().abs(), "{y}: {v}");
        }
    }

    #[test]
    fn pochhammer_sign_changes() {
        // (−1.5)_s / s!: 1, −1.5, 0.375, 0.0625
        let p = pochhammer_over_factorial(-1.5, 4);
        let v: Vec<f64> = p.iter().map(|t| t.sign as f64 * t.ln_abs.exp()).collect();
        let expect = [1.0, -1.5, 0.375, 0.0625];
        for (a, b) in v.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{v:?}");
        }
        let p = pochhammer_over_factorial(-2.0, 5);
        assert_eq!(p[3].sign, 0);
        assert_eq!(p[4].sign, 0);
    }

    #[test]
    fn large_counts_hit_the_term_cap() {
        let b = BetaParams::new(101.0, 901.0).unwrap();
        let p = ProductPdf::new(&[b, b, b]).unwrap();
        assert!(matches!(p.pdf(1e-3), Err(Error::Truncation { terms: MAX_TERMS, .. })));
    }

    #[test]
    fn rejects_out_of_range() {
        let p = ProductPdf::new(&[BetaParams::uniform()]).unwrap();
        assert!(p.pdf(0.0).is_err());
        assert!(p.pdf(1.0).is_err());
        assert!(ProductPdf::new(&[]).is_err());
    }
}
