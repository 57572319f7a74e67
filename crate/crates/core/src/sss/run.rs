use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Purpose, RngStream};
use crate::mma::{ChainState, Prior};
use crate::model::PerformanceModel;

use super::config::{Layout, Scaling, SsConfig};
use super::diagnostics::{estimate_gamma, level_cov};
use super::level::{run_conditional_level, select_top, LevelChains, LevelScaling};

/// Bookkeeping for level `j = 1, …, m`: the samples drawn from
/// `π(·|F_{j−1})` and the threshold `b_j` that defines `F_j`.
///
/// Level 1 holds the unconditional Monte Carlo samples. For `j < m`, `b_j`
/// is the adaptive threshold and `n` the number of seeds passed on; for the
/// last level, `b_m` is the critical threshold and `n` the failure count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub j: usize,
    pub threshold: f64,
    pub n: usize,
    pub n_samples: usize,
    pub sigma_schedule: Vec<f64>,
    pub batch_acceptance: Vec<f64>,
    /// Candidate acceptance rate of the chains that produced the samples.
    pub acceptance_rate: Option<f64>,
    pub component_acceptance_rate: Option<f64>,
    /// Correlation factor of the indicator `g > b_j` along the chains.
    /// `None` when all indicators are equal.
    pub gamma: Option<f64>,
    pub evaluations: u64,
    pub g_values: Vec<f64>,
}

impl LevelRecord {
    /// Conditional probability estimate `n / n_samples`.
    pub fn p_hat(&self) -> f64 {
        self.n as f64 / self.n_samples as f64
    }

    /// Level c.o.v. with the chain correlation factor, when defined.
    pub fn cov(&self) -> Option<f64> {
        level_cov(self.p_hat(), self.n_samples, self.gamma?).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRunResult {
    pub model: String,
    pub dim: usize,
    pub critical_threshold: f64,
    pub exact_pf: Option<f64>,
    pub levels: Vec<LevelRecord>,
    pub m: usize,
    pub p_hat: f64,
    pub total_evaluations: u64,
    /// False when `max_levels` stopped the run before the exit condition.
    pub converged: bool,
    pub no_failure_observed: bool,
    /// `sqrt(Σ δ_j²)`, ignoring correlation between levels.
    pub cov_estimate: Option<f64>,
    pub warnings: Vec<String>,
    pub config: SsConfig,
}

/// Product of the level ratios `n_j / N_j`, multiplied in level order.
pub fn product_estimate(counts: impl IntoIterator<Item = (usize, usize)>) -> f64 {
    counts
        .into_iter()
        .fold(1.0, |acc, (n, total)| acc * (n as f64 / total as f64))
}

/// Subset Simulation with i.i.d. standard normal inputs.
pub fn run_subset_simulation(model: &PerformanceModel, config: &SsConfig) -> Result<SubsetRunResult> {
    run_subset_simulation_with_prior(model, &Prior::standard_normal(model.dim()), config)
}

struct Stage {
    states: Vec<ChainState>,
    n_chains: usize,
    chain_length: usize,
    chains: Option<LevelChains>,
    evaluations: u64,
}

pub fn run_subset_simulation_with_prior(
    model: &PerformanceModel,
    prior: &Prior,
    config: &SsConfig,
) -> Result<SubsetRunResult> {
    let layout = config.validate()?;
    if prior.dim() != model.dim() {
        return Err(Error::Config(format!(
            "prior has dimension {} but the model has {}",
            prior.dim(),
            model.dim()
        )));
    }
    for w in &layout.warnings {
        log::warn!("{w}");
    }
    let seed = config.master_seed;
    let b = model.threshold();
    let n = config.n;

    let states: Vec<ChainState> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = RngStream::at(seed, 0, i as u64, Purpose::Prior);
            ChainState::evaluate(prior.sample(&mut s), model)
        })
        .collect::<Result<_>>()?;
    let mut stage = Stage {
        states,
        n_chains: n,
        chain_length: 1,
        chains: None,
        evaluations: n as u64,
    };

    let mut levels: Vec<LevelRecord> = Vec::new();
    let converged;
    loop {
        let g: Vec<f64> = stage.states.iter().map(|s| s.g).collect();
        let n_samples = g.len();
        let n_f = g.iter().filter(|&&v| model.is_failure(v)).count();
        let j = levels.len() + 1;
        let done = (n_f as f64) >= config.p0 * n_samples as f64;
        if done || j >= config.max_levels {
            converged = done;
            levels.push(record(j, b, n_f, &stage, g));
            break;
        }
        let (b_next, seed_idx) = select_top(&g, layout.n_chains)?;
        let seeds: Vec<ChainState> = seed_idx.iter().map(|&i| stage.states[i].clone()).collect();
        levels.push(record(j, b_next, seed_idx.len(), &stage, g));
        log::debug!("level {j}: threshold {b_next}");
        let mut chains = run_conditional_level(
            model,
            prior,
            &seeds,
            b_next,
            layout.chain_length,
            &level_scaling(&config.scaling, &layout, j),
            config.family,
            seed,
            j as u32,
        )?;
        stage = Stage {
            states: std::mem::take(&mut chains.states),
            n_chains: chains.n_chains,
            chain_length: chains.chain_length,
            evaluations: chains.evaluations,
            chains: Some(chains),
        };
    }

    let m = levels.len();
    let p_hat = product_estimate(levels.iter().map(|l| (l.n, l.n_samples)));
    let total_evaluations = levels.iter().map(|l| l.evaluations).sum();
    let cov_estimate = levels
        .iter()
        .map(|l| l.cov().map(|c| c * c))
        .sum::<Option<f64>>()
        .map(f64::sqrt);
    let last = levels.last().expect("at least one level");
    let no_failure_observed = last.n == 0;
    if !converged {
        log::warn!("stopped after {m} levels without reaching the failure domain");
    }
    Ok(SubsetRunResult {
        model: model.name().to_string(),
        dim: model.dim(),
        critical_threshold: b,
        exact_pf: model.exact_pf(),
        m,
        p_hat,
        total_evaluations,
        converged,
        no_failure_observed,
        cov_estimate,
        warnings: layout.warnings.clone(),
        config: config.clone(),
        levels,
    })
}

fn level_scaling(scaling: &Scaling, layout: &Layout, j: usize) -> LevelScaling {
    match scaling {
        Scaling::Fixed(s) => LevelScaling::Fixed(s[(j - 1).min(s.len() - 1)]),
        Scaling::Adaptive(p) => LevelScaling::Adaptive {
            params: p.clone(),
            batch: layout.batch,
        },
    }
}

fn record(j: usize, threshold: f64, n: usize, stage: &Stage, g: Vec<f64>) -> LevelRecord {
    let indicators: Vec<bool> = g.iter().map(|&v| v > threshold).collect();
    let gamma = estimate_gamma(&indicators, stage.n_chains, stage.chain_length).ok();
    let chains = stage.chains.as_ref();
    LevelRecord {
        j,
        threshold,
        n,
        n_samples: g.len(),
        sigma_schedule: chains.map(|c| c.sigma_schedule.clone()).unwrap_or_default(),
        batch_acceptance: chains.map(|c| c.batch_rates.clone()).unwrap_or_default(),
        acceptance_rate: chains.and_then(|c| c.acceptance_rate()),
        component_acceptance_rate: chains.and_then(|c| c.component_acceptance_rate()),
        gamma,
        evaluations: stage.evaluations,
        g_values: g,
    }
}
