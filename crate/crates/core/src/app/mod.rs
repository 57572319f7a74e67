//! Configuration files, command orchestration and the text outputs behind
//! the `subsim` binary.

mod config;
mod output;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{summarize_run, PosteriorSummary, ProductPdf};
use crate::math::derive_seed;
use crate::model::PerformanceModel;
use crate::sss::{
    optimal_p0, optimal_spread_scan, run_subset_simulation, cov_vs_p0, SpreadScanConfig,
    SpreadScanTable, SubsetRunResult,
};

pub use config::{
    ProblemName, ProblemSection, RunConfig, ScalingMode, ScalingSection, SsSection,
};
pub use output::{log_grid, write_atomic};

/// Process exit status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Runtime = 1,
    Config = 2,
    NotConverged = 3,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl AppError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            AppError::Config(_) => ExitStatus::Config,
            AppError::Runtime(_) | AppError::Io(_) => ExitStatus::Runtime,
        }
    }
}

impl From<crate::Error> for AppError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Config(_) | crate::Error::Domain { .. } => AppError::Config(e.to_string()),
            _ => AppError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

/// Per-level row of the run summary (the level's samples are omitted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub j: usize,
    pub b_j: f64,
    pub n_j: usize,
    pub n_samples: usize,
    pub rho_j: Option<f64>,
    pub gamma_j: Option<f64>,
    pub sigma_schedule: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub master_seed: u64,
    pub model: String,
    pub dim: usize,
    pub critical_threshold: f64,
    pub exact_pf: Option<f64>,
    pub estimate: f64,
    pub m: usize,
    pub converged: bool,
    pub no_failure_observed: bool,
    pub total_evaluations: u64,
    pub cov_estimate: Option<f64>,
    pub warnings: Vec<String>,
    pub levels: Vec<LevelRow>,
    pub posterior: PosteriorSummary,
}

impl RunSummary {
    pub fn new(config: &RunConfig, result: &SubsetRunResult, posterior: PosteriorSummary) -> Self {
        Self {
            config: config.clone(),
            master_seed: config.seed,
            model: result.model.clone(),
            dim: result.dim,
            critical_threshold: result.critical_threshold,
            exact_pf: result.exact_pf,
            estimate: result.p_hat,
            m: result.m,
            converged: result.converged,
            no_failure_observed: result.no_failure_observed,
            total_evaluations: result.total_evaluations,
            cov_estimate: result.cov_estimate,
            warnings: result.warnings.clone(),
            levels: result
                .levels
                .iter()
                .map(|l| LevelRow {
                    j: l.j,
                    b_j: l.threshold,
                    n_j: l.n,
                    n_samples: l.n_samples,
                    rho_j: l.acceptance_rate,
                    gamma_j: l.gamma,
                    sigma_schedule: l.sigma_schedule.clone(),
                })
                .collect(),
            posterior,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: SubsetRunResult,
    pub summary: RunSummary,
    pub status: ExitStatus,
    pub files: Vec<PathBuf>,
}

/// Runs the configured benchmark and writes `run_summary.json`,
/// `levels.csv` and `posterior_grid.csv` into `out` (when given).
pub fn cmd_run(config: &RunConfig, out: Option<&Path>, exact_posterior: bool) -> Result<RunOutcome, AppError> {
    let model = config.build_model()?;
    cmd_run_with_model(config, &model, out, exact_posterior)
}

/// Like [`cmd_run`] for a caller-supplied model.
pub fn cmd_run_with_model(
    config: &RunConfig,
    model: &PerformanceModel,
    out: Option<&Path>,
    exact_posterior: bool,
) -> Result<RunOutcome, AppError> {
    config.validate()?;
    let result = run_subset_simulation(model, &config.ss_config())?;
    let posterior = summarize_run(&result)?;
    let summary = RunSummary::new(config, &result, posterior);
    let mut files = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let header = output::config_header(config);
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        files.push(write_atomic(&dir.join("run_summary.json"), json.as_bytes())?);
        files.push(write_atomic(
            &dir.join("levels.csv"),
            output::levels_csv(&header, &summary.levels).as_bytes(),
        )?);
        let grid = posterior_grid(&summary.posterior, exact_posterior)?;
        files.push(write_atomic(
            &dir.join("posterior_grid.csv"),
            output::grid_csv(&header, &grid, exact_posterior).as_bytes(),
        )?);
    }
    let status = if result.converged {
        ExitStatus::Success
    } else {
        ExitStatus::NotConverged
    };
    Ok(RunOutcome {
        result,
        summary,
        status,
        files,
    })
}

/// One row of the posterior grid: `p`, fan density, exact density.
pub type GridRow = (f64, f64, Option<f64>);

/// Fan (and optionally exact) posterior density on a 512-point log grid
/// spanning `[mean·1e-2, min(1, mean·1e2)]`.
pub fn posterior_grid(post: &PosteriorSummary, exact: bool) -> Result<Vec<GridRow>, AppError> {
    let lo = post.mean * 1e-2;
    let hi = (post.mean * 1e2).min(1.0);
    let ps = log_grid(lo, hi, 512);
    let series = if exact {
        let f: Vec<_> = post.levels.iter().map(|l| l.params).collect();
        Some(ProductPdf::new(&f)?)
    } else {
        None
    };
    Ok(ps
        .par_iter()
        .map(|&p| {
            let ex = series.as_ref().map(|s| match s.pdf(p) {
                Ok(v) => v,
                Err(_) if p >= 1.0 => 0.0,
                Err(e) => {
                    log::warn!("exact density at {p}: {e}");
                    f64::NAN
                }
            });
            (p, post.fan.pdf(p), ex)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRun {
    pub index: usize,
    pub seed: u64,
    pub estimate: Option<f64>,
    pub m: Option<usize>,
    pub converged: Option<bool>,
    pub posterior_mean: Option<f64>,
    pub posterior_cov: Option<f64>,
    pub evaluations: Option<u64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: RunConfig,
    pub runs: Vec<StudyRun>,
    pub completed: usize,
    /// Some runs failed; statistics cover the completed ones.
    pub partial: bool,
    pub exact_pf: Option<f64>,
    pub mean_estimate: f64,
    pub frequentist_cov: f64,
    pub mean_posterior_cov: f64,
    pub mean_evaluations: f64,
    /// Runs that needed exactly `m` levels, indexed by `m`.
    pub level_counts: Vec<usize>,
}

/// Repeated runs with seeds `derive_seed(config.seed, i)`.
pub fn cmd_study(config: &RunConfig, runs: usize) -> Result<StudyReport, AppError> {
    if runs < 2 {
        return Err(AppError::Config("a study needs at least 2 runs".into()));
    }
    let seeds: Vec<u64> = (0..runs as u64).map(|i| derive_seed(config.seed, i)).collect();
    run_study(config, &seeds)
}

/// Repeated runs of `config` with the given per-run seeds.
pub fn run_study(config: &RunConfig, seeds: &[u64]) -> Result<StudyReport, AppError> {
    if seeds.len() < 2 {
        return Err(AppError::Config("a study needs at least 2 runs".into()));
    }
    config.validate()?;
    let model = config.build_model()?;
    let runs: Vec<StudyRun> = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| {
            let mut ss = config.ss_config();
            ss.master_seed = seed;
            let outcome = run_subset_simulation(&model, &ss)
                .and_then(|r| summarize_run(&r).map(|p| (r, p)));
            match outcome {
                Ok((r, p)) => StudyRun {
                    index,
                    seed,
                    estimate: Some(r.p_hat),
                    m: Some(r.m),
                    converged: Some(r.converged),
                    posterior_mean: Some(p.mean),
                    posterior_cov: Some(p.cov),
                    evaluations: Some(r.total_evaluations),
                    error: None,
                },
                Err(e) => {
                    log::warn!("run {index} failed: {e}");
                    StudyRun {
                        index,
                        seed,
                        estimate: None,
                        m: None,
                        converged: None,
                        posterior_mean: None,
                        posterior_cov: None,
                        evaluations: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    let ok: Vec<&StudyRun> = runs.iter().filter(|r| r.error.is_none()).collect();
    let k = ok.len();
    let est: Vec<f64> = ok.iter().filter_map(|r| r.estimate).collect();
    let mean = est.iter().sum::<f64>() / k.max(1) as f64;
    let sd = if k > 1 {
        (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    let max_m = ok.iter().filter_map(|r| r.m).max().unwrap_or(0);
    let mut level_counts = vec![0; max_m + 1];
    for m in ok.iter().filter_map(|r| r.m) {
        level_counts[m] += 1;
    }
    Ok(StudyReport {
        config: config.clone(),
        completed: k,
        partial: k < runs.len(),
        exact_pf: model.exact_pf(),
        mean_estimate: mean,
        frequentist_cov: sd / mean,
        mean_posterior_cov: ok.iter().filter_map(|r| r.posterior_cov).sum::<f64>() / k.max(1) as f64,
        mean_evaluations: ok.iter().filter_map(|r| r.evaluations).sum::<u64>() as f64 / k.max(1) as f64,
        level_counts,
        runs,
    })
}

/// Writes `study.json` and `study_runs.csv`.
pub fn write_study(report: &StudyReport, dir: &Path) -> Result<Vec<PathBuf>, AppError> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    Ok(vec![
        write_atomic(&dir.join("study.json"), json.as_bytes())?,
        write_atomic(
            &dir.join("study_runs.csv"),
            output::study_csv(&output::config_header(&report.config), &report.runs).as_bytes(),
        )?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P0SweepRow {
    pub gamma_bar: f64,
    pub p0: f64,
    pub delta: f64,
    pub is_argmin: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P0Sweep {
    pub pf: f64,
    pub n_total: f64,
    pub rows: Vec<P0SweepRow>,
    /// Continuous minimizer per `γ̄`.
    pub optimum: Vec<(f64, f64)>,
}

/// Total c.o.v. against `p0` for each `γ̄`, marking the grid minimum.
pub fn cmd_p0_sweep(pf: f64, n_total: f64, gammas: &[f64], grid: &[f64]) -> Result<P0Sweep, AppError> {
    if gammas.is_empty() || grid.is_empty() {
        return Err(AppError::Config("p0 sweep needs gamma values and a p0 grid".into()));
    }
    let mut rows = Vec::new();
    let mut optimum = Vec::new();
    for &g in gammas {
        let deltas = grid
            .iter()
            .map(|&p| cov_vs_p0(pf, n_total, g, p))
            .collect::<crate::Result<Vec<f64>>>()?;
        let best = deltas
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty grid");
        rows.extend(grid.iter().zip(&deltas).enumerate().map(|(i, (&p0, &delta))| P0SweepRow {
            gamma_bar: g,
            p0,
            delta,
            is_argmin: i == best,
        }));
        optimum.push((g, optimal_p0(pf, n_total, g)?));
    }
    Ok(P0Sweep {
        pf,
        n_total,
        rows,
        optimum,
    })
}

pub fn p0_sweep_csv(sweep: &P0Sweep) -> String {
    output::p0_csv(sweep)
}

/// Spread scan on the benchmark named in `config`.
pub fn cmd_sigma_scan(
    config: &RunConfig,
    level: usize,
    sigmas: &[f64],
    n: Option<usize>,
    repetitions: usize,
) -> Result<SpreadScanTable, AppError> {
    let model = config.build_model()?;
    let mut scan = SpreadScanConfig::new(level, sigmas.to_vec(), n.unwrap_or(config.ss.n), repetitions);
    scan.p0 = config.ss.p0;
    scan.family = config.scaling.family;
    scan.master_seed = config.seed;
    Ok(optimal_spread_scan(&model, &scan)?)
}

pub fn sigma_scan_csv(config: &RunConfig, table: &SpreadScanTable) -> String {
    output::scan_csv(&output::config_header(config), table)
}
