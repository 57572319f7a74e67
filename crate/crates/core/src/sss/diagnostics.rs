//! Correlation and coefficient-of-variation diagnostics, spread control,
//! and the choice of `p0`.

use crate::error::{Error, Result};

/// Correlation factor `γ` of the level estimator from chain-major indicator
/// sequences (`n_chains` chains of `chain_length` states each).
///
/// The autocovariance at lag `i` is pooled over all chains,
/// `R(i) = Σ_k Σ_{i'} I(i') I(i'+i) / (N − i·N_c) − p̂²`, and
/// `γ = 2 Σ_{i=1}^{N_s−1} (1 − i/N_s) R(i)/R(0)`.
pub fn estimate_gamma(indicators: &[bool], n_chains: usize, chain_length: usize) -> Result<f64> {
    let n = n_chains * chain_length;
    if n == 0 || indicators.len() != n {
        return Err(Error::Config(format!(
            "expected {n_chains}×{chain_length} indicators, got {}",
            indicators.len()
        )));
    }
    let hits = indicators.iter().filter(|&&x| x).count();
    let p = hits as f64 / n as f64;
    let r0 = p - p * p;
    if hits == 0 || hits == n || r0 <= 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    let mut gamma = 0.0;
    for lag in 1..chain_length {
        let mut joint = 0u64;
        for chain in indicators.chunks_exact(chain_length) {
            joint += chain[..chain_length - lag]
                .iter()
                .zip(&chain[lag..])
                .filter(|(a, b)| **a && **b)
                .count() as u64;
        }
        let r = joint as f64 / (n - lag * n_chains) as f64 - p * p;
        gamma += 2.0 * (1.0 - lag as f64 / chain_length as f64) * r / r0;
    }
    Ok(gamma)
}

/// C.o.v. of a level estimate from `n` correlated samples,
/// `sqrt((1 − p)/(n p) · (1 + γ))`, with negative `γ` clamped to zero.
pub fn level_cov(p_hat: f64, n: usize, gamma: f64) -> Result<f64> {
    if !(p_hat > 0.0 && p_hat < 1.0) || n == 0 {
        return Err(Error::UndefinedCov(p_hat));
    }
    Ok(((1.0 - p_hat) / (n as f64 * p_hat) * (1.0 + gamma.max(0.0))).sqrt())
}

/// Spread for the next batch of chains given the acceptance rate of the
/// batch just finished.
pub fn adapt_spread(batch_rate: f64, sigma: f64, band: [f64; 2], step: f64) -> f64 {
    if batch_rate < band[0] {
        sigma / step
    } else if batch_rate > band[1] {
        sigma * step
    } else {
        sigma
    }
}

/// `(1 − p0) / (p0 ln² p0)`: the part of the total c.o.v. that depends on
/// `p0`.
pub fn p0_factor(p0: f64) -> f64 {
    let l = p0.ln();
    (1.0 - p0) / (p0 * l * l)
}

/// Approximate c.o.v. of the final estimate when `n_total` samples are
/// spread over the `ln pF / ln p0` levels needed to reach `pF`.
pub fn cov_vs_p0(pf: f64, n_total: f64, gamma_bar: f64, p0: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(crate::error::domain("cov_vs_p0", format!("p0 = {p0}")));
    }
    if !(pf > 0.0 && pf < p0) {
        return Err(crate::error::domain("cov_vs_p0", format!("pF = {pf} with p0 = {p0}")));
    }
    if !(n_total > 0.0) || !(gamma_bar > -1.0) {
        return Err(crate::error::domain(
            "cov_vs_p0",
            format!("N_T = {n_total}, gamma = {gamma_bar}"),
        ));
    }
    let lf = pf.ln();
    Ok((p0_factor(p0) * lf * lf / n_total * (1.0 + gamma_bar)).sqrt())
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// `p0` minimizing [`cov_vs_p0`] for the given `(pF, N_T, γ̄)`.
pub fn optimal_p0(pf: f64, n_total: f64, gamma_bar: f64) -> Result<f64> {
    cov_vs_p0(pf, n_total, gamma_bar, 0.5)?;
    let lo = pf * (1.0 + 1e-9);
    Ok(golden_section_min(
        |p| cov_vs_p0(pf, n_total, gamma_bar, p).unwrap_or(f64::INFINITY),
        lo,
        1.0 - 1e-9,
        1e-10,
    ))
}
