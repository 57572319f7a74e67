//! Isolated-level experiments on the analytic benchmarks: chains are seeded
//! with exact conditional samples, so one level can be studied without
//! running the levels below it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{derive_seed, Purpose, RngStream};
use crate::mma::{ChainState, Prior, ProposalFamily};
use crate::model::{analytic_intermediate_thresholds, PerformanceModel};

use super::config::AdaptiveScaling;
use super::diagnostics::estimate_gamma;
use super::level::{run_conditional_level, LevelChains, LevelScaling};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadScanConfig {
    /// Chains sample `π(·|F_level)` and track the indicator of
    /// `F_{level+1}`. Level 0 is the unconditional distribution.
    pub level: usize,
    pub sigmas: Vec<f64>,
    pub n: usize,
    pub p0: f64,
    pub repetitions: usize,
    pub family: ProposalFamily,
    pub master_seed: u64,
}

impl SpreadScanConfig {
    pub fn new(level: usize, sigmas: Vec<f64>, n: usize, repetitions: usize) -> Self {
        Self {
            level,
            sigmas,
            n,
            p0: 0.1,
            repetitions,
            family: ProposalFamily::Gaussian,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadScanRow {
    pub sigma: f64,
    /// Mean correlation factor over repetitions where it was defined.
    pub gamma: Option<f64>,
    pub gamma_se: Option<f64>,
    pub acceptance_rate: f64,
    pub defined_repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadScanTable {
    pub level: usize,
    pub rows: Vec<SpreadScanRow>,
    /// Spread with the smallest mean correlation factor.
    pub argmin: Option<f64>,
}

/// Exact seeds for the isolated level `level` of an analytic benchmark,
/// together with the conditioning and indicator thresholds.
pub struct IsolatedLevel {
    pub condition: f64,
    pub target: f64,
    pub seeds: Vec<ChainState>,
}

pub fn isolated_level(
    model: &PerformanceModel,
    level: usize,
    p0: f64,
    n_chains: usize,
    master_seed: u64,
) -> Result<IsolatedLevel> {
    let bench = model.benchmark().ok_or_else(|| {
        Error::Config("isolated levels need an analytic benchmark model".into())
    })?;
    let d = model.dim();
    let t = analytic_intermediate_thresholds(bench.kind(), d, p0, level + 1)?;
    let condition = if level == 0 { f64::NEG_INFINITY } else { t[level - 1] };
    let target = t[level];
    let seeds = (0..n_chains)
        .into_par_iter()
        .map(|k| {
            let mut s = RngStream::at(master_seed, level as u32, k as u64, Purpose::ExactSeed);
            ChainState::evaluate(bench.exact_conditional_sample(condition, d, &mut s)?, model)
        })
        .collect::<Result<_>>()?;
    Ok(IsolatedLevel {
        condition,
        target,
        seeds,
    })
}

/// Runs one isolated level with the given spread policy.
pub fn run_isolated_level(
    model: &PerformanceModel,
    level: usize,
    p0: f64,
    n: usize,
    scaling: &LevelScaling,
    family: ProposalFamily,
    master_seed: u64,
) -> Result<(IsolatedLevel, LevelChains)> {
    let n_chains = ((n as f64 * p0).round() as usize).max(1);
    let chain_length = ((1.0 / p0).round() as usize).max(1);
    let iso = isolated_level(model, level, p0, n_chains, master_seed)?;
    let chains = run_conditional_level(
        model,
        &Prior::standard_normal(model.dim()),
        &iso.seeds,
        iso.condition,
        chain_length,
        scaling,
        family,
        master_seed,
        level as u32,
    )?;
    Ok((iso, chains))
}

/// Mean correlation factor and acceptance rate of the chains at one level
/// for each spread on a grid.
///
/// Repetition `r` uses the same seeds and random streams for every spread.
pub fn optimal_spread_scan(model: &PerformanceModel, cfg: &SpreadScanConfig) -> Result<SpreadScanTable> {
    if cfg.sigmas.is_empty() || cfg.repetitions == 0 || cfg.n == 0 {
        return Err(Error::Config(
            "spread scan needs spreads, repetitions and samples".into(),
        ));
    }
    if !(cfg.p0 > 0.0 && cfg.p0 < 1.0) {
        return Err(Error::Config(format!("p0 = {} not in (0, 1)", cfg.p0)));
    }
    let mut rows = Vec::with_capacity(cfg.sigmas.len());
    for &sigma in &cfg.sigmas {
        let mut gammas = Vec::new();
        let mut rates = Vec::new();
        for r in 0..cfg.repetitions {
            let seed = derive_seed(cfg.master_seed, r as u64);
            let (iso, chains) = run_isolated_level(
                model,
                cfg.level,
                cfg.p0,
                cfg.n,
                &LevelScaling::Fixed(sigma),
                cfg.family,
                seed,
            )?;
            let ind = chains.indicators(iso.target);
            if let Ok(g) = estimate_gamma(&ind, chains.n_chains, chains.chain_length) {
                gammas.push(g);
            }
            if let Some(rate) = chains.acceptance_rate() {
                rates.push(rate);
            }
        }
        let k = gammas.len();
        let mean = (k > 0).then(|| gammas.iter().sum::<f64>() / k as f64);
        let se = mean.filter(|_| k > 1).map(|m| {
            (gammas.iter().map(|g| (g - m).powi(2)).sum::<f64>() / ((k - 1) * k) as f64).sqrt()
        });
        rows.push(SpreadScanRow {
            sigma,
            gamma: mean,
            gamma_se: se,
            acceptance_rate: if rates.is_empty() {
                f64::NAN
            } else {
                rates.iter().sum::<f64>() / rates.len() as f64
            },
            defined_repetitions: k,
        });
    }
    let argmin = rows
        .iter()
        .filter_map(|r| r.gamma.map(|g| (r.sigma, g)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(s, _)| s);
    Ok(SpreadScanTable {
        level: cfg.level,
        rows,
        argmin,
    })
}

/// Adaptive spread control on one isolated level; returns the chains with
/// their per-batch spreads and acceptance rates.
pub fn adaptive_isolated_level(
    model: &PerformanceModel,
    level: usize,
    p0: f64,
    n: usize,
    params: &AdaptiveScaling,
    batch: usize,
    master_seed: u64,
) -> Result<LevelChains> {
    let (_, chains) = run_isolated_level(
        model,
        level,
        p0,
        n,
        &LevelScaling::Adaptive {
            params: params.clone(),
            batch,
        },
        ProposalFamily::Gaussian,
        master_seed,
    )?;
    Ok(chains)
}
