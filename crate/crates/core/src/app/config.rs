use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::mma::ProposalFamily;
use crate::model::{ball_problem, linear_problem, PerformanceModel};
use crate::sss::{AdaptiveScaling, Scaling, SsConfig};

use super::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemName {
    Linear,
    Ball,
    /// Supplied through the library API; cannot be built from a file.
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: ProblemName,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pf_target: Option<f64>,
    /// Critical threshold, as an alternative to `pf_target`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

fn default_max_levels() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsSection {
    pub p0: f64,
    pub n: usize,
    #[serde(default = "default_max_levels")]
    pub max_levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingMode {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub mode: ScalingMode,
    #[serde(default = "default_band")]
    pub band: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_sigma0")]
    pub sigma0: f64,
    /// Per-level spreads for `mode = "fixed"`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigma: Vec<f64>,
    #[serde(default = "default_family")]
    pub family: ProposalFamily,
}

fn default_band() -> [f64; 2] {
    [0.30, 0.50]
}
fn default_step() -> f64 {
    1.3
}
fn default_sigma0() -> f64 {
    1.0
}
fn default_family() -> ProposalFamily {
    ProposalFamily::Gaussian
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self {
            mode: ScalingMode::Adaptive,
            band: default_band(),
            batch: None,
            step: default_step(),
            sigma0: default_sigma0(),
            sigma: Vec::new(),
            family: default_family(),
        }
    }
}

/// Run configuration file (TOML, or JSON as embedded in outputs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub problem: ProblemSection,
    pub ss: SsSection,
    #[serde(default)]
    pub scaling: ScalingSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, AppError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| AppError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self, AppError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn ss_config(&self) -> SsConfig {
        let s = &self.scaling;
        let scaling = match s.mode {
            ScalingMode::Adaptive => Scaling::Adaptive(AdaptiveScaling {
                band: s.band,
                batch: s.batch,
                step: s.step,
                sigma0: s.sigma0,
            }),
            ScalingMode::Fixed => Scaling::Fixed(s.sigma.clone()),
        };
        SsConfig {
            p0: self.ss.p0,
            n: self.ss.n,
            max_levels: self.ss.max_levels,
            scaling,
            family: s.family,
            master_seed: self.seed,
        }
    }

    /// Checks everything that can be checked before any sampling.
    pub fn validate(&self) -> Result<(), AppError> {
        let p = &self.problem;
        if p.d == 0 {
            return Err(AppError::Config("problem.d must be >= 1".into()));
        }
        match (p.pf_target, p.b) {
            (Some(_), Some(_)) => {
                return Err(AppError::Config(
                    "give only one of problem.pf_target and problem.b".into(),
                ))
            }
            (None, None) if p.name != ProblemName::External => {
                return Err(AppError::Config(
                    "missing field `problem.pf_target` (or `problem.b`)".into(),
                ))
            }
            (Some(pf), _) if !(pf > 0.0 && pf < 1.0) => {
                return Err(AppError::Config(format!(
                    "problem.pf_target = {pf} not in (0, 1)"
                )))
            }
            (_, Some(b)) if !b.is_finite() => {
                return Err(AppError::Config(format!("problem.b = {b} is not finite")))
            }
            _ => {}
        }
        if self.scaling.mode == ScalingMode::Fixed && self.scaling.sigma.is_empty() {
            return Err(AppError::Config(
                "missing field `scaling.sigma` for fixed scaling".into(),
            ));
        }
        self.ss_config()
            .validate()
            .map_err(|e| AppError::Config(e.to_string()))?;
        Ok(())
    }

    /// Builds the benchmark model named in the file.
    pub fn build_model(&self) -> Result<PerformanceModel, AppError> {
        let p = &self.problem;
        let cfg = |e: crate::Error| AppError::Config(e.to_string());
        match (p.name, p.pf_target, p.b) {
            (ProblemName::Linear, Some(pf), _) => linear_problem(p.d, pf).map_err(cfg),
            (ProblemName::Ball, Some(pf), _) => ball_problem(p.d, pf).map_err(cfg),
            (ProblemName::Linear, None, Some(b)) => {
                Ok(linear_problem(p.d, 0.5).map_err(cfg)?.with_threshold(b))
            }
            (ProblemName::Ball, None, Some(b)) => {
                Ok(ball_problem(p.d, 0.5).map_err(cfg)?.with_threshold(b))
            }
            (ProblemName::External, ..) => Err(AppError::Config(
                "external problems are supplied through the library API".into(),
            )),
            _ => Err(AppError::Config("problem threshold missing".into())),
        }
    }
}
