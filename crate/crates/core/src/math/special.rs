//! Special functions: log-gamma, log-beta, the standard normal and
//! chi-square distributions and their inverses.
//!
//! Forward functions delegate to `statrs`; inverses are solved here by
//! safeguarded Newton iteration inside a shrinking bracket, which keeps them
//! strictly monotone in `p`.

use statrs::function::{beta as sbeta, erf, gamma as sgamma};
use std::f64::consts::{LN_2, SQRT_2};

use crate::error::{domain, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("log_gamma", format!("x = {x} must be positive")));
    }
    Ok(sgamma::ln_gamma(x))
}

/// `ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b)`.
pub fn log_beta_fn(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Unchecked `ln Γ` for internal hot paths whose arguments are known positive.
#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Φ(x).
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / SQRT_2)
}

/// 1 − Φ(x), accurate in the upper tail.
#[inline]
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erf::erfc(x / SQRT_2)
}

/// Φ⁻¹(p) for `0 < p < 1`.
pub fn std_normal_inv_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("std_normal_inv_cdf", format!("p = {p} not in (0, 1)")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Solve on the lower half, where Φ is evaluated through erfc without
    // cancellation, then reflect.
    let (q, sign) = if p < 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    let x0 = lower_tail_guess(q);
    let x = solve_increasing(
        |x| std_normal_cdf(x) - q,
        std_normal_pdf,
        -40.0,
        0.0,
        x0,
    );
    Ok(sign * x)
}

/// Upper-tail inverse: returns x with 1 − Φ(x) = q, for `0 < q < 1`.
pub fn std_normal_inv_sf(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(domain("std_normal_inv_sf", format!("q = {q} not in (0, 1)")));
    }
    Ok(-std_normal_inv_cdf(q)?)
}

fn lower_tail_guess(q: f64) -> f64 {
    // Rough rational tail approximation; Newton does the rest.
    let t = (-2.0 * q.ln()).sqrt();
    -(t - (2.515_517 + 0.802_853 * t + 0.010_328 * t * t)
        / (1.0 + 1.432_788 * t + 0.189_269 * t * t + 0.001_308 * t * t * t))
}

/// Chi-square CDF with `d` degrees of freedom.
pub fn chi2_cdf(q: f64, d: u32) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return 1.0;
    }
    sgamma::gamma_lr(0.5 * d as f64, 0.5 * q)
}

/// Chi-square survival function 1 − F(q).
pub fn chi2_sf(q: f64, d: u32) -> f64 {
    if q <= 0.0 {
        return 1.0;
    }
    if q.is_infinite() {
        return 0.0;
    }
    sgamma::gamma_ur(0.5 * d as f64, 0.5 * q)
}

pub fn chi2_pdf(q: f64, d: u32) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let k = 0.5 * d as f64;
    ((k - 1.0) * q.ln() - 0.5 * q - k * LN_2 - ln_gamma(k)).exp()
}

/// Chi-square quantile: q with F(q) = p.
pub fn chi2_inv_cdf(p: f64, d: u32) -> Result<f64> {
    if d == 0 {
        return Err(domain("chi2_inv_cdf", "degrees of freedom must be >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("chi2_inv_cdf", format!("p = {p} not in (0, 1)")));
    }
    Ok(chi2_quantile(p, 1.0 - p, d))
}

/// Chi-square upper quantile: q with 1 − F(q) = tail, accurate for small tails.
pub fn chi2_inv_sf(tail: f64, d: u32) -> Result<f64> {
    if d == 0 {
        return Err(domain("chi2_inv_sf", "degrees of freedom must be >= 1"));
    }
    if !(tail > 0.0 && tail < 1.0) {
        return Err(domain("chi2_inv_sf", format!("tail = {tail} not in (0, 1)")));
    }
    Ok(chi2_quantile(1.0 - tail, tail, d))
}

fn chi2_quantile(p: f64, tail: f64, d: u32) -> f64 {
    let df = d as f64;
    // Wilson–Hilferty starting point.
    let z = if p <= 0.5 {
        std_normal_inv_cdf(p).unwrap_or(0.0)
    } else {
        -std_normal_inv_cdf(tail).unwrap_or(0.0)
    };
    let c = 2.0 / (9.0 * df);
    let x0 = (df * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-8 * df);

    let mut hi = x0.max(df) * 2.0 + 10.0;
    while chi2_cdf(hi, d) < p && chi2_sf(hi, d) > tail {
        hi *= 2.0;
    }
    if p <= 0.5 {
        solve_increasing(|x| chi2_cdf(x, d) - p, |x| chi2_pdf(x, d), 0.0, hi, x0)
    } else {
        // Work with the survival function: tail − sf(x) is increasing in x.
        solve_increasing(|x| tail - chi2_sf(x, d), |x| chi2_pdf(x, d), 0.0, hi, x0)
    }
}

/// Regularized incomplete beta function I_x(a, b).
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        sbeta::beta_reg(a, b, x)
    }
}

/// Root of an increasing `f` in `[lo, hi]` with derivative `df`.
///
/// Newton steps that leave the current bracket are replaced by bisection.
pub(crate) fn solve_increasing<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, x0: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = df(x);
        let mut next = if slope > 0.0 && slope.is_finite() {
            x - fx / slope
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let tol = 4.0 * f64::EPSILON * next.abs().max(1e-300);
        if (next - x).abs() <= tol || hi - lo <= tol {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_closed_forms() {
        assert_eq!(std_normal_inv_cdf(0.5).unwrap(), 0.0);
        let b = std_normal_inv_cdf(1.0 - 1e-3).unwrap();
        assert!((b - 3.090_232_306_167_813).abs() < 1e-9, "{b}");
        let one = std_normal_inv_cdf(0.841_344_746_068_543).unwrap();
        assert!((one - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normal_quantile_rejects_boundaries() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(std_normal_inv_cdf(p).is_err());
        }
    }

    #[test]
    fn chi2_median_two_dof_is_two_ln_two() {
        let q = chi2_inv_cdf(0.5, 2).unwrap();
        assert!((q - 2.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn chi2_round_trip_large_dof() {
        for q in [500.0, 1000.0, 1500.0] {
            let p = chi2_cdf(q, 1000);
            if p > 0.0 && p < 1.0 {
                let back = chi2_inv_cdf(p, 1000).unwrap();
                assert!((back - q).abs() < 1e-6, "{q} -> {p} -> {back}");
            }
        }
    }

    #[test]
    fn chi2_upper_quantile_small_tail() {
        let q = chi2_inv_sf(1e-6, 1000).unwrap();
        assert!((chi2_sf(q, 1000) / 1e-6 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn log_gamma_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        let half = log_gamma(0.5).unwrap();
        assert!((half - 0.572_364_942_924_700_1).abs() < 1e-14);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.0).is_err());
    }

    #[test]
    fn inverses_are_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let x = std_normal_inv_cdf(p).unwrap();
            assert!(x > prev);
            prev = x;
        }
        let mut prev = 0.0;
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let x = chi2_inv_cdf(p, 7).unwrap();
            assert!(x > prev);
            prev = x;
        }
    }
}
