//! Performance models `g: R^d → R` with a critical threshold `b`, and the
//! two analytic benchmarks with known failure probabilities.
//!
//! The failure domain is always the strict exceedance set
//! `F = {θ : g(θ) > b}`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{chi2_inv_sf, chi2_sf, std_normal_inv_sf, std_normal_sf, RngStream};

/// Thread-safe count of performance-function evaluations.
#[derive(Debug, Clone, Default)]
pub struct EvaluationCounter(Arc<AtomicU64>);

impl EvaluationCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn increment(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Shape of an analytic benchmark, used where exact intermediate thresholds
/// or exact conditional samples are needed.
#[derive(Debug, Clone, PartialEq)]
pub enum Benchmark {
    /// `g(θ) = ⟨θ, e⟩` for a unit vector `e`.
    Linear { direction: Arc<[f64]> },
    /// `g(θ) = ‖θ‖²`.
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Linear,
    Ball,
}

impl Benchmark {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Benchmark::Linear { .. } => ProblemKind::Linear,
            Benchmark::Ball => ProblemKind::Ball,
        }
    }

    /// P(g(θ) > t) under i.i.d. standard normal θ.
    pub fn exceedance_probability(&self, t: f64, dim: usize) -> f64 {
        match self {
            Benchmark::Linear { .. } => std_normal_sf(t),
            Benchmark::Ball => chi2_sf(t, dim as u32),
        }
    }

    /// Exact draw from the standard normal distribution conditioned on
    /// `g(θ) > t`, by inverting the distribution of `g` and sampling the
    /// remaining directions unconditionally.
    pub fn exact_conditional_sample(
        &self,
        t: f64,
        dim: usize,
        stream: &mut RngStream,
    ) -> Result<Vec<f64>> {
        let tail = self.exceedance_probability(t, dim);
        if !(tail > 0.0) {
            return Err(Error::Config(format!(
                "threshold {t} has zero exceedance probability"
            )));
        }
        // u in (0, 1]: a zero draw would map to an infinite quantile.
        let u = 1.0 - stream.uniform();
        let q = (u * tail).min(1.0 - f64::EPSILON);
        let mut z = stream.sample_std_normal(dim);
        match self {
            Benchmark::Linear { direction } => {
                let x = std_normal_inv_sf(q)?;
                let proj: f64 = z.iter().zip(direction.iter()).map(|(a, b)| a * b).sum();
                for (zi, ei) in z.iter_mut().zip(direction.iter()) {
                    *zi += (x - proj) * ei;
                }
                Ok(z)
            }
            Benchmark::Ball => {
                let r2 = chi2_inv_sf(q, dim as u32)?;
                let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                let scale = r2.sqrt() / norm;
                z.iter_mut().for_each(|v| *v *= scale);
                Ok(z)
            }
        }
    }
}

pub type PerformanceFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A system under study: dimension, performance function, and critical
/// threshold. Cloning is cheap and clones share the evaluation counter.
#[derive(Clone)]
pub struct PerformanceModel {
    name: String,
    dim: usize,
    threshold: f64,
    exact_pf: Option<f64>,
    func: Arc<PerformanceFn>,
    counter: EvaluationCounter,
    benchmark: Option<Benchmark>,
}

impl fmt::Debug for PerformanceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerformanceModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("threshold", &self.threshold)
            .field("exact_pf", &self.exact_pf)
            .field("evaluations", &self.counter.get())
            .finish()
    }
}

impl PerformanceModel {
    /// Wraps a user-supplied performance function. `threshold` may be
    /// `-inf` (every point fails).
    pub fn new<F>(name: impl Into<String>, dim: usize, threshold: f64, func: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::Config("model dimension must be >= 1".into()));
        }
        if threshold.is_nan() || threshold == f64::INFINITY {
            return Err(Error::Config(format!("invalid critical threshold {threshold}")));
        }
        Ok(Self {
            name: name.into(),
            dim,
            threshold,
            exact_pf: None,
            func: Arc::new(func),
            counter: EvaluationCounter::new(),
            benchmark: None,
        })
    }

    pub fn with_exact_pf(mut self, pf: f64) -> Self {
        self.exact_pf = Some(pf);
        self
    }

    /// Same model with a different critical threshold.
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self.exact_pf = self
            .benchmark
            .as_ref()
            .map(|b| b.exceedance_probability(threshold, self.dim));
        self
    }

    /// Same model sharing the function but counting into a fresh counter.
    pub fn with_fresh_counter(&self) -> Self {
        let mut m = self.clone();
        m.counter = EvaluationCounter::new();
        m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn exact_pf(&self) -> Option<f64> {
        self.exact_pf
    }

    pub fn benchmark(&self) -> Option<&Benchmark> {
        self.benchmark.as_ref()
    }

    pub fn evaluations(&self) -> u64 {
        self.counter.get()
    }

    pub fn counter(&self) -> &EvaluationCounter {
        &self.counter
    }

    /// Evaluates `g(θ)` and counts the call. Non-finite outputs are errors.
    pub fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        debug_assert_eq!(theta.len(), self.dim);
        self.counter.increment();
        let g = (self.func)(theta);
        if g.is_finite() {
            Ok(g)
        } else {
            Err(Error::NonFiniteModelOutput { value: g })
        }
    }

    #[inline]
    pub fn is_failure(&self, g: f64) -> bool {
        g > self.threshold
    }
}

fn check_target(d: usize, pf_target: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::Config("dimension must be >= 1".into()));
    }
    if !(pf_target > 0.0 && pf_target < 1.0) {
        return Err(Error::Config(format!(
            "target failure probability {pf_target} not in (0, 1)"
        )));
    }
    Ok(())
}

/// Half-space benchmark along the diagonal direction `(1, …, 1)/√d`.
pub fn linear_problem(d: usize, pf_target: f64) -> Result<PerformanceModel> {
    let e = vec![1.0 / (d.max(1) as f64).sqrt(); d];
    linear_problem_along(pf_target, e)
}

/// Half-space benchmark `⟨θ, e⟩ > Φ⁻¹(1 − pF)` along a caller-chosen
/// direction (normalized here).
pub fn linear_problem_along(pf_target: f64, direction: Vec<f64>) -> Result<PerformanceModel> {
    let d = direction.len();
    check_target(d, pf_target)?;
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Config("direction must be a nonzero finite vector".into()));
    }
    let e: Arc<[f64]> = direction.iter().map(|v| v / norm).collect();
    let b = std_normal_inv_sf(pf_target)?;
    let dir = Arc::clone(&e);
    let mut model = PerformanceModel::new("linear", d, b, move |theta: &[f64]| {
        theta.iter().zip(dir.iter()).map(|(t, e)| t * e).sum()
    })?
    .with_exact_pf(pf_target);
    model.benchmark = Some(Benchmark::Linear { direction: e });
    Ok(model)
}

/// Exterior-of-a-ball benchmark `‖θ‖² > F⁻¹_{χ²_d}(1 − pF)`.
pub fn ball_problem(d: usize, pf_target: f64) -> Result<PerformanceModel> {
    check_target(d, pf_target)?;
    let b = chi2_inv_sf(pf_target, d as u32)?;
    let mut model = PerformanceModel::new("ball", d, b, |theta: &[f64]| {
        theta.iter().map(|t| t * t).sum()
    })?
    .with_exact_pf(pf_target);
    model.benchmark = Some(Benchmark::Ball);
    Ok(model)
}

/// Thresholds `t_1 < … < t_m` with `P(g > t_j) = p0^j` exactly.
pub fn analytic_intermediate_thresholds(
    kind: ProblemKind,
    d: usize,
    p0: f64,
    m: usize,
) -> Result<Vec<f64>> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Config(format!("p0 = {p0} not in (0, 1)")));
    }
    if m == 0 || d == 0 {
        return Err(Error::Config("level count and dimension must be >= 1".into()));
    }
    (1..=m as i32)
        .map(|j| {
            let tail = p0.powi(j);
            match kind {
                ProblemKind::Linear => std_normal_inv_sf(tail),
                ProblemKind::Ball => chi2_inv_sf(tail, d as u32),
            }
        })
        .collect()
}
