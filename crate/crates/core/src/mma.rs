//! Modified Metropolis sampling of `π(·|F)` for a product-form prior `π`.
//!
//! Each step proposes every coordinate independently, accepts or rejects
//! it against its own marginal, then keeps the assembled candidate only if
//! it lies in the conditioning set `{g > threshold}`. A candidate with no
//! moved coordinate equals the current state, so it is not sent to the
//! model at all.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{RngStream, std_normal_pdf};
use crate::model::PerformanceModel;

/// One-dimensional marginal density of the prior.
pub trait Marginal: Send + Sync + fmt::Debug {
    fn ln_pdf(&self, x: f64) -> f64;
    fn sample(&self, stream: &mut RngStream) -> f64;
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StandardNormal;

impl Marginal for StandardNormal {
    #[inline]
    fn ln_pdf(&self, x: f64) -> f64 {
        std_normal_pdf(x).ln()
    }

    fn sample(&self, stream: &mut RngStream) -> f64 {
        stream.std_normal()
    }
}

/// Product-form prior `π(θ) = Π π_k(θ_k)`.
#[derive(Debug, Clone)]
pub enum Prior {
    /// i.i.d. N(0, 1) in every coordinate.
    StandardNormal { dim: usize },
    /// One marginal per coordinate.
    Product(Vec<Arc<dyn Marginal>>),
}

impl Prior {
    pub fn standard_normal(dim: usize) -> Self {
        Prior::StandardNormal { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Prior::StandardNormal { dim } => *dim,
            Prior::Product(m) => m.len(),
        }
    }

    pub fn marginal(&self, k: usize) -> &dyn Marginal {
        match self {
            Prior::StandardNormal { .. } => &StandardNormal,
            Prior::Product(m) => m[k].as_ref(),
        }
    }

    /// `ln π_k(to) − ln π_k(from)`.
    #[inline]
    fn ln_ratio(&self, k: usize, to: f64, from: f64) -> f64 {
        match self {
            Prior::StandardNormal { .. } => 0.5 * (from * from - to * to),
            Prior::Product(m) => m[k].ln_pdf(to) - m[k].ln_pdf(from),
        }
    }

    pub fn sample(&self, stream: &mut RngStream) -> Vec<f64> {
        match self {
            Prior::StandardNormal { dim } => stream.sample_std_normal(*dim),
            Prior::Product(m) => m.iter().map(|mk| mk.sample(stream)).collect(),
        }
    }
}

/// Univariate proposal `S_k(·|center)`.
pub trait ComponentProposal: Send + Sync {
    fn sample(&self, center: f64, stream: &mut RngStream) -> f64;
    /// Density of proposing `x` from `center`.
    fn density(&self, x: f64, center: f64) -> f64;
    fn is_symmetric(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalFamily {
    Gaussian,
    Uniform,
}

/// Symmetric random-walk proposal: Gaussian with standard deviation
/// `spread`, or uniform with half-width `spread`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalSpec {
    pub family: ProposalFamily,
    pub spread: f64,
}

impl ProposalSpec {
    pub fn gaussian(spread: f64) -> Result<Self> {
        Self::new(ProposalFamily::Gaussian, spread)
    }

    pub fn uniform(half_width: f64) -> Result<Self> {
        Self::new(ProposalFamily::Uniform, half_width)
    }

    pub fn new(family: ProposalFamily, spread: f64) -> Result<Self> {
        if !(spread > 0.0 && spread.is_finite()) {
            return Err(Error::Config(format!("proposal spread {spread} must be positive")));
        }
        Ok(Self { family, spread })
    }
}

impl ComponentProposal for ProposalSpec {
    #[inline]
    fn sample(&self, center: f64, stream: &mut RngStream) -> f64 {
        match self.family {
            ProposalFamily::Gaussian => center + self.spread * stream.std_normal(),
            ProposalFamily::Uniform => center + self.spread * (2.0 * stream.uniform() - 1.0),
        }
    }

    fn density(&self, x: f64, center: f64) -> f64 {
        let z = (x - center) / self.spread;
        match self.family {
            ProposalFamily::Gaussian => std_normal_pdf(z) / self.spread,
            ProposalFamily::Uniform if z.abs() <= 1.0 => 0.5 / self.spread,
            ProposalFamily::Uniform => 0.0,
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Acceptance probability for one coordinate, with the proposal-density
/// correction for asymmetric proposals:
/// `min{1, π(ξ)S(θ|ξ) / (π(θ)S(ξ|θ))}`.
pub fn mmh_ratio<M, P>(candidate: f64, current: f64, marginal: &M, proposal: &P) -> f64
where
    M: Marginal + ?Sized,
    P: ComponentProposal + ?Sized,
{
    let num = marginal.ln_pdf(candidate) + proposal.density(current, candidate).ln();
    let den = marginal.ln_pdf(current) + proposal.density(candidate, current).ln();
    if den == f64::NEG_INFINITY {
        return if num > f64::NEG_INFINITY { 1.0 } else { 0.0 };
    }
    (num - den).exp().min(1.0)
}

/// Accept/reject of a single proposed coordinate given the uniform draw `u`.
#[inline]
pub fn accept_component(current: f64, proposed: f64, acceptance: f64, u: f64) -> f64 {
    if u < acceptance {
        proposed
    } else {
        current
    }
}

/// A Markov chain state with its cached performance value.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub theta: Vec<f64>,
    pub g: f64,
}

impl ChainState {
    pub fn evaluate(theta: Vec<f64>, model: &PerformanceModel) -> Result<Self> {
        let g = model.evaluate(&theta)?;
        Ok(Self { theta, g })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    /// The candidate differed from the current state and was kept.
    pub accepted: bool,
    /// The model was evaluated on the candidate.
    pub evaluated: bool,
}

/// Per-chain acceptance bookkeeping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainStats {
    pub candidate_acceptances: u64,
    pub component_acceptances: Vec<u64>,
    pub length: usize,
    pub evaluations: u64,
}

impl ChainStats {
    fn new(dim: usize, length: usize) -> Self {
        Self {
            candidate_acceptances: 0,
            component_acceptances: vec![0; dim],
            length,
            evaluations: 0,
        }
    }

    /// Fraction of transitions whose candidate was kept.
    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.length > 1).then(|| self.candidate_acceptances as f64 / (self.length - 1) as f64)
    }
}

/// Builds the candidate in `out`; returns whether any coordinate moved.
fn propose_candidate<P: ComponentProposal + ?Sized>(
    theta: &[f64],
    proposal: &P,
    prior: &Prior,
    stream: &mut RngStream,
    out: &mut Vec<f64>,
    mut component_hits: Option<&mut [u64]>,
) -> bool {
    out.clear();
    let mut moved = false;
    let symmetric = proposal.is_symmetric();
    for (k, &current) in theta.iter().enumerate() {
        let proposed = proposal.sample(current, stream);
        let ln_r = if symmetric {
            prior.ln_ratio(k, proposed, current)
        } else {
            mmh_ratio(proposed, current, prior.marginal(k), proposal).ln()
        };
        let keep = ln_r >= 0.0 || stream.uniform() < ln_r.exp();
        if keep && proposed != current {
            out.push(proposed);
            moved = true;
            if let Some(hits) = component_hits.as_deref_mut() {
                hits[k] += 1;
            }
        } else {
            out.push(current);
        }
    }
    moved
}

/// One Modified Metropolis transition targeting `π(·|g > level_threshold)`.
///
/// Performs exactly zero or one model evaluation. A rejected candidate
/// returns a copy of `current`.
pub fn mma_step<P: ComponentProposal + ?Sized>(
    current: &ChainState,
    proposal: &P,
    prior: &Prior,
    level_threshold: f64,
    model: &PerformanceModel,
    stream: &mut RngStream,
) -> Result<(ChainState, StepOutcome)> {
    let mut buf = Vec::with_capacity(current.theta.len());
    step_into(current, proposal, prior, level_threshold, model, stream, &mut buf, None)
}

#[allow(clippy::too_many_arguments)]
fn step_into<P: ComponentProposal + ?Sized>(
    current: &ChainState,
    proposal: &P,
    prior: &Prior,
    level_threshold: f64,
    model: &PerformanceModel,
    stream: &mut RngStream,
    buf: &mut Vec<f64>,
    hits: Option<&mut [u64]>,
) -> Result<(ChainState, StepOutcome)> {
    let moved = propose_candidate(&current.theta, proposal, prior, stream, buf, hits);
    if !moved {
        return Ok((
            current.clone(),
            StepOutcome {
                accepted: false,
                evaluated: false,
            },
        ));
    }
    let g = model.evaluate(buf)?;
    if g > level_threshold {
        Ok((
            ChainState {
                theta: std::mem::take(buf),
                g,
            },
            StepOutcome {
                accepted: true,
                evaluated: true,
            },
        ))
    } else {
        Ok((
            current.clone(),
            StepOutcome {
                accepted: false,
                evaluated: true,
            },
        ))
    }
}

/// Runs a chain of `length` states starting from (and including) `seed`.
///
/// `seed` is expected to lie in the level, i.e. `seed.g > level_threshold`.
pub fn run_chain<P: ComponentProposal + ?Sized>(
    seed: ChainState,
    length: usize,
    proposal: &P,
    prior: &Prior,
    level_threshold: f64,
    model: &PerformanceModel,
    stream: &mut RngStream,
) -> Result<(Vec<ChainState>, ChainStats)> {
    if length == 0 {
        return Err(Error::Config("chain length must be >= 1".into()));
    }
    let dim = seed.theta.len();
    let mut stats = ChainStats::new(dim, length);
    let mut states = Vec::with_capacity(length);
    states.push(seed);
    let mut buf = Vec::with_capacity(dim);
    for _ in 1..length {
        let current = states.last().expect("non-empty");
        let (next, outcome) = step_into(
            current,
            proposal,
            prior,
            level_threshold,
            model,
            stream,
            &mut buf,
            Some(&mut stats.component_acceptances),
        )?;
        stats.candidate_acceptances += outcome.accepted as u64;
        stats.evaluations += outcome.evaluated as u64;
        states.push(next);
    }
    Ok((states, stats))
}
