//! Threshold selection and generation of one conditional level.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::{Purpose, RngStream};
use crate::mma::{run_chain, ChainState, ChainStats, Prior, ProposalFamily, ProposalSpec};
use crate::model::PerformanceModel;

use super::config::AdaptiveScaling;
use super::diagnostics::adapt_spread;

/// Adaptive threshold for `p0` and the indices of the samples above it.
///
/// The threshold is the midpoint between the `(N − N·p0)`-th and
/// `(N − N·p0 + 1)`-th smallest values. Ties are broken by position, so the
/// seeds are always the last `round(N·p0)` samples in `(g, index)` order.
pub fn select_threshold(g: &[f64], p0: f64) -> Result<(f64, Vec<usize>)> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Config(format!("p0 = {p0} not in (0, 1)")));
    }
    select_top(g, (g.len() as f64 * p0).round() as usize)
}

pub(crate) fn select_top(g: &[f64], n_seeds: usize) -> Result<(f64, Vec<usize>)> {
    let n = g.len();
    if n_seeds == 0 || n_seeds >= n {
        return Err(Error::Config(format!(
            "cannot select {n_seeds} seeds from {n} samples"
        )));
    }
    if g.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFiniteModelOutput { value: f64::NAN });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g[a].total_cmp(&g[b]).then(a.cmp(&b)));
    let lo = g[order[n - n_seeds - 1]];
    let hi = g[order[n - n_seeds]];
    if g[order[0]] == g[order[n - 1]] {
        return Err(Error::DegenerateLevel { count: n, value: lo });
    }
    if lo == hi {
        log::debug!("tied values straddle the level threshold {lo}");
    }
    let threshold = 0.5 * (lo + hi);
    let mut seeds = order[n - n_seeds..].to_vec();
    seeds.sort_unstable();
    Ok((threshold, seeds))
}

/// Spread policy for the chains of one level.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelScaling {
    Fixed(f64),
    Adaptive { params: AdaptiveScaling, batch: usize },
}

/// Output of [`run_conditional_level`].
#[derive(Debug, Clone)]
pub struct LevelChains {
    /// Chain-major states: chain `k` occupies `k·N_s .. (k+1)·N_s`.
    pub states: Vec<ChainState>,
    pub n_chains: usize,
    pub chain_length: usize,
    /// Spread used by each batch.
    pub sigma_schedule: Vec<f64>,
    /// Candidate acceptance rate of each batch (absent for `N_s = 1`).
    pub batch_rates: Vec<f64>,
    pub stats: Vec<ChainStats>,
    pub evaluations: u64,
}

impl LevelChains {
    /// Fraction of transitions whose candidate was kept, over all chains.
    pub fn acceptance_rate(&self) -> Option<f64> {
        let steps: usize = self.stats.iter().map(|s| s.length.saturating_sub(1)).sum();
        let acc: u64 = self.stats.iter().map(|s| s.candidate_acceptances).sum();
        (steps > 0).then(|| acc as f64 / steps as f64)
    }

    /// Mean per-coordinate acceptance rate.
    pub fn component_acceptance_rate(&self) -> Option<f64> {
        let steps: usize = self.stats.iter().map(|s| s.length.saturating_sub(1)).sum();
        let dim = self.stats.first()?.component_acceptances.len();
        let acc: u64 = self
            .stats
            .iter()
            .flat_map(|s| s.component_acceptances.iter())
            .sum();
        (steps > 0 && dim > 0).then(|| acc as f64 / (steps * dim) as f64)
    }

    pub fn g_values(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.g).collect()
    }

    pub fn indicators(&self, threshold: f64) -> Vec<bool> {
        self.states.iter().map(|s| s.g > threshold).collect()
    }
}

/// Grows one Modified Metropolis chain of `chain_length` states from each
/// seed, all conditioned on `g > threshold`.
///
/// Chains are processed in batches; the spread changes only between
/// batches. Chain `k` draws from the stream `(level, k, Proposal)`, so the
/// result does not depend on how the batch is scheduled across threads.
#[allow(clippy::too_many_arguments)]
pub fn run_conditional_level(
    model: &PerformanceModel,
    prior: &Prior,
    seeds: &[ChainState],
    threshold: f64,
    chain_length: usize,
    scaling: &LevelScaling,
    family: ProposalFamily,
    master_seed: u64,
    level: u32,
) -> Result<LevelChains> {
    let n_chains = seeds.len();
    let (mut sigma, batch, adaptive) = match scaling {
        LevelScaling::Fixed(s) => (*s, n_chains.max(1), None),
        LevelScaling::Adaptive { params, batch } => (params.sigma0, (*batch).max(1), Some(params)),
    };
    let mut states = Vec::with_capacity(n_chains * chain_length);
    let mut stats = Vec::with_capacity(n_chains);
    let mut sigma_schedule = Vec::new();
    let mut batch_rates = Vec::new();
    let mut evaluations = 0;
    let mut start = 0;
    while start < n_chains {
        let end = (start + batch).min(n_chains);
        let proposal = ProposalSpec::new(family, sigma)?;
        let results: Vec<(Vec<ChainState>, ChainStats)> = (start..end)
            .into_par_iter()
            .map(|k| {
                let mut stream = RngStream::at(master_seed, level, k as u64, Purpose::Proposal);
                run_chain(
                    seeds[k].clone(),
                    chain_length,
                    &proposal,
                    prior,
                    threshold,
                    model,
                    &mut stream,
                )
            })
            .collect::<Result<_>>()?;
        sigma_schedule.push(sigma);
        let mut acc = 0;
        for (chain, st) in results {
            states.extend(chain);
            acc += st.candidate_acceptances;
            evaluations += st.evaluations;
            stats.push(st);
        }
        if chain_length > 1 {
            let rate = acc as f64 / ((end - start) * (chain_length - 1)) as f64;
            batch_rates.push(rate);
            if let Some(p) = adaptive {
                sigma = adapt_spread(rate, sigma, p.band, p.step);
            }
        }
        start = end;
    }
    Ok(LevelChains {
        states,
        n_chains,
        chain_length,
        sigma_schedule,
        batch_rates,
        stats,
        evaluations,
    })
}
