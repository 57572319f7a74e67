//! Bayesian post-processing of Subset Simulation: the posterior of the
//! failure probability under a uniform prior on every level probability.

mod oracle;
mod product;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::math::quadrature::gauss_legendre;
use crate::math::BetaParams;
use crate::sss::{product_estimate, SubsetRunResult};

pub use oracle::rohatgi_oracle;
pub use product::{exact_product_pdf, ProductPdf, DEFAULT_REL_TOL, MAX_TERMS};

/// Posterior `Be(n + 1, N − n + 1)` of one level probability after
/// observing `n` of `N` samples above the level threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPosterior {
    pub n: usize,
    pub total: usize,
    pub params: BetaParams,
}

impl LevelPosterior {
    pub fn new(n: usize, total: usize) -> Result<Self> {
        if n > total {
            return Err(domain("LevelPosterior::new", format!("n = {n} > N = {total}")));
        }
        Ok(Self {
            n,
            total,
            params: BetaParams::new(n as f64 + 1.0, (total - n) as f64 + 1.0)?,
        })
    }

    /// `n / N`, or `None` without data.
    pub fn mode(&self) -> Option<f64> {
        (self.total > 0).then(|| self.n as f64 / self.total as f64)
    }
}

/// Posterior of a plain Monte Carlo estimate with `n` failures in `N`
/// samples.
pub fn mc_plus(n: usize, total: usize) -> Result<LevelPosterior> {
    LevelPosterior::new(n, total)
}

/// One posterior per level of a run.
pub fn level_posteriors(result: &SubsetRunResult) -> Result<Vec<LevelPosterior>> {
    posteriors_from_counts(result.levels.iter().map(|l| (l.n, l.n_samples)))
}

pub fn posteriors_from_counts(
    counts: impl IntoIterator<Item = (usize, usize)>,
) -> Result<Vec<LevelPosterior>> {
    counts
        .into_iter()
        .map(|(n, total)| LevelPosterior::new(n, total))
        .collect()
}

fn params(levels: &[LevelPosterior]) -> Vec<BetaParams> {
    levels.iter().map(|l| l.params).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub second: f64,
    pub cov: f64,
}

/// First two moments of the product of independent betas.
pub fn product_moments(factors: &[BetaParams]) -> Result<Moments> {
    if factors.is_empty() {
        return Err(domain("product_moments", "at least one factor is required"));
    }
    let mut mean = 1.0;
    let mut second = 1.0;
    for f in factors {
        let s = f.alpha + f.beta;
        mean *= f.alpha / s;
        second *= f.alpha * (f.alpha + 1.0) / (s * (s + 1.0));
    }
    Ok(Moments {
        mean,
        second,
        cov: (second / (mean * mean) - 1.0).max(0.0).sqrt(),
    })
}

pub fn posterior_moments(levels: &[LevelPosterior]) -> Result<Moments> {
    product_moments(&params(levels))
}

/// Single beta with the same first two moments as the product.
pub fn fan_beta(factors: &[BetaParams]) -> Result<BetaParams> {
    let m = product_moments(factors)?;
    let mu1 = m.mean;
    let mu2 = m.second;
    let var = mu2 - mu1 * mu1;
    if !(var > 0.0) {
        return Err(Error::Precision {
            mu2,
            mu1_sq: mu1 * mu1,
        });
    }
    let k = (mu1 - mu2) / var;
    BetaParams::new(mu1 * k, (1.0 - mu1) * k)
}

pub fn fan_approximation(levels: &[LevelPosterior]) -> Result<BetaParams> {
    fan_beta(&params(levels))
}

/// Product of the level modes `Π n_j / N_j`.
pub fn map_estimate(levels: &[LevelPosterior]) -> f64 {
    product_estimate(levels.iter().map(|l| (l.n, l.total)))
}

/// Exact posterior density of the failure probability at `y`.
pub fn exact_posterior_pdf(levels: &[LevelPosterior], y: f64, rel_tol: f64) -> Result<f64> {
    exact_product_pdf(&params(levels), y, rel_tol)
}

/// `E[loss(p)]` under a beta density, by Gauss–Legendre rules doubled until
/// two successive results agree to `1e-8` relative.
///
/// The integral is split at the mean; a piece touching an endpoint where the
/// density is unbounded is mapped by `x = s^{1/a}` (or its mirror) first.
pub fn expected_loss_beta<L: Fn(f64) -> f64>(dist: &BetaParams, loss: L) -> Result<f64> {
    const TOL: f64 = 1e-8;
    const MAX_NODES: usize = 1 << 13;
    let tail = 1e-15;
    let (a, b) = (dist.alpha, dist.beta);
    let mid = dist.mean();
    let lo = if a < 1.0 { 0.0 } else { dist.quantile(tail)? };
    let hi = if b < 1.0 { 1.0 } else { dist.quantile(1.0 - tail)? };
    let eval = |n: usize| -> f64 {
        let (x, w) = gauss_legendre(n);
        let mut total = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let s = 0.5 * (xi + 1.0);
            // left piece [lo, mid]
            let (p, jac) = if a < 1.0 {
                let p = mid * s.powf(1.0 / a);
                (p, mid * s.powf(1.0 / a - 1.0) / a)
            } else {
                (lo + (mid - lo) * s, mid - lo)
            };
            if p > 0.0 {
                total += 0.5 * wi * jac * loss(p) * dist.pdf(p);
            }
            // right piece [mid, hi]
            let (p, jac) = if b < 1.0 {
                let q = (1.0 - mid) * s.powf(1.0 / b);
                (1.0 - q, (1.0 - mid) * s.powf(1.0 / b - 1.0) / b)
            } else {
                (mid + (hi - mid) * s, hi - mid)
            };
            if p < 1.0 {
                total += 0.5 * wi * jac * loss(p) * dist.pdf(p);
            }
        }
        total
    };
    let mut n = 16;
    let mut prev = eval(n);
    while n < MAX_NODES {
        n *= 2;
        let cur = eval(n);
        if (cur - prev).abs() <= TOL * cur.abs().max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature {
        estimate: prev,
        achieved: f64::NAN,
    })
}

/// Expected loss under the moment-matched beta posterior.
pub fn expected_loss<L: Fn(f64) -> f64>(levels: &[LevelPosterior], loss: L) -> Result<f64> {
    expected_loss_beta(&fan_approximation(levels)?, loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub levels: Vec<LevelPosterior>,
    pub fan: BetaParams,
    pub mean: f64,
    pub second_moment: f64,
    pub cov: f64,
    pub map: f64,
    pub m: usize,
    /// Equal-tailed 95% interval from the moment-matched beta.
    pub credible_95: (f64, f64),
}

pub fn summarize(levels: Vec<LevelPosterior>) -> Result<PosteriorSummary> {
    let moments = posterior_moments(&levels)?;
    let fan = fan_approximation(&levels)?;
    Ok(PosteriorSummary {
        fan,
        mean: moments.mean,
        second_moment: moments.second,
        cov: moments.cov,
        map: map_estimate(&levels),
        m: levels.len(),
        credible_95: fan.credible_interval(0.95)?,
        levels,
    })
}

pub fn summarize_run(result: &SubsetRunResult) -> Result<PosteriorSummary> {
    summarize(level_posteriors(result)?)
}
