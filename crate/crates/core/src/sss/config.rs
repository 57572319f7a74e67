use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mma::ProposalFamily;

/// Acceptance-rate driven spread control applied between batches of chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveScaling {
    /// Target band for the candidate acceptance rate.
    pub band: [f64; 2],
    /// Chains per batch; `None` means `max(1, round(0.1·N_c))`.
    pub batch: Option<usize>,
    pub step: f64,
    /// Spread used for the first batch of every level.
    pub sigma0: f64,
}

impl Default for AdaptiveScaling {
    fn default() -> Self {
        Self {
            band: [0.30, 0.50],
            batch: None,
            step: 1.3,
            sigma0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// Spread per conditional level `1, 2, …`; the last entry repeats.
    Fixed(Vec<f64>),
    Adaptive(AdaptiveScaling),
}

impl Default for Scaling {
    fn default() -> Self {
        Scaling::Adaptive(AdaptiveScaling::default())
    }
}

impl Scaling {
    pub fn fixed(sigma: f64) -> Self {
        Scaling::Fixed(vec![sigma])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsConfig {
    pub p0: f64,
    /// Samples per level.
    pub n: usize,
    pub max_levels: usize,
    pub scaling: Scaling,
    pub family: ProposalFamily,
    pub master_seed: u64,
}

impl Default for SsConfig {
    fn default() -> Self {
        Self {
            p0: 0.1,
            n: 1000,
            max_levels: 20,
            scaling: Scaling::default(),
            family: ProposalFamily::Gaussian,
            master_seed: 0,
        }
    }
}

/// Integer chain layout derived from a validated [`SsConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    /// Seeds (chains) per conditional level.
    pub n_chains: usize,
    /// States per chain, seed included.
    pub chain_length: usize,
    /// Chains per adaptation batch.
    pub batch: usize,
    pub warnings: Vec<String>,
}

impl Layout {
    /// Samples per conditional level, `N_c·N_s`.
    pub fn level_samples(&self) -> usize {
        self.n_chains * self.chain_length
    }
}

impl SsConfig {
    pub fn new(p0: f64, n: usize) -> Self {
        Self {
            p0,
            n,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_scaling(mut self, scaling: Scaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn with_max_levels(mut self, max_levels: usize) -> Self {
        self.max_levels = max_levels;
        self
    }

    pub fn validate(&self) -> Result<Layout> {
        let p0 = self.p0;
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::Config(format!("p0 = {p0} not in (0, 1)")));
        }
        if self.n == 0 {
            return Err(Error::Config("N must be >= 1".into()));
        }
        if self.max_levels == 0 {
            return Err(Error::Config("max_levels must be >= 1".into()));
        }
        let exact_nc = self.n as f64 * p0;
        let n_chains = exact_nc.round() as usize;
        if n_chains < 1 {
            return Err(Error::Config(format!(
                "N·p0 = {exact_nc} rounds to zero seeds"
            )));
        }
        if n_chains >= self.n {
            return Err(Error::Config(format!(
                "N·p0 = {exact_nc} leaves no sample below the threshold"
            )));
        }
        let chain_length = (1.0 / p0).round() as usize;
        let mut warnings = Vec::new();
        if (exact_nc - n_chains as f64).abs() > 1e-9 {
            warnings.push(format!("N·p0 = {exact_nc} rounded to {n_chains} chains"));
        }
        if (1.0 / p0 - chain_length as f64).abs() > 1e-9 {
            warnings.push(format!(
                "1/p0 = {} rounded to chain length {chain_length}",
                1.0 / p0
            ));
        }
        if n_chains * chain_length != self.n {
            warnings.push(format!(
                "conditional levels hold {} samples instead of N = {}",
                n_chains * chain_length,
                self.n
            ));
        }
        let batch = match &self.scaling {
            Scaling::Fixed(s) => {
                if s.is_empty() {
                    return Err(Error::Config("fixed scaling needs at least one spread".into()));
                }
                if let Some(bad) = s.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(Error::Config(format!("spread {bad} must be positive")));
                }
                n_chains
            }
            Scaling::Adaptive(a) => {
                let [lo, hi] = a.band;
                if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                    return Err(Error::Config(format!("acceptance band [{lo}, {hi}] is invalid")));
                }
                if !(a.step > 1.0 && a.step.is_finite()) {
                    return Err(Error::Config(format!("step factor {} must exceed 1", a.step)));
                }
                if !(a.sigma0 > 0.0 && a.sigma0.is_finite()) {
                    return Err(Error::Config(format!("sigma0 = {} must be positive", a.sigma0)));
                }
                match a.batch {
                    Some(0) => return Err(Error::Config("batch size must be >= 1".into())),
                    Some(b) => b.min(n_chains),
                    None => ((0.1 * n_chains as f64).round() as usize).max(1),
                }
            }
        };
        Ok(Layout {
            n_chains,
            chain_length,
            batch,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_layout_has_no_warnings() {
        let l = SsConfig::new(0.1, 1000).validate().unwrap();
        assert_eq!((l.n_chains, l.chain_length, l.batch), (100, 10, 10));
        assert!(l.warnings.is_empty());
    }

    #[test]
    fn rounding_warns() {
        let l = SsConfig::new(0.3, 100).validate().unwrap();
        assert_eq!((l.n_chains, l.chain_length), (30, 3));
        assert_eq!(l.warnings.len(), 2);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SsConfig::new(0.0, 100).validate().is_err());
        assert!(SsConfig::new(1.0, 100).validate().is_err());
        assert!(SsConfig::new(0.001, 100).validate().is_err());
        assert!(SsConfig::new(0.1, 100)
            .with_scaling(Scaling::Fixed(vec![]))
            .validate()
            .is_err());
        assert!(SsConfig::new(0.1, 100)
            .with_scaling(Scaling::Fixed(vec![1.0, -2.0]))
            .validate()
            .is_err());
    }
}
