//! Subset Simulation: adaptive intermediate thresholds, conditional levels
//! grown by Modified Metropolis chains, and the estimator diagnostics.

mod config;
mod diagnostics;
mod level;
mod run;
mod scan;

pub use config::{AdaptiveScaling, Layout, Scaling, SsConfig};
pub use diagnostics::{
    adapt_spread, cov_vs_p0, estimate_gamma, golden_section_min, level_cov, optimal_p0, p0_factor,
};
pub use level::{run_conditional_level, select_threshold, LevelChains, LevelScaling};
pub use run::{
    product_estimate, run_subset_simulation, run_subset_simulation_with_prior, LevelRecord,
    SubsetRunResult,
};
pub use scan::{
    adaptive_isolated_level, isolated_level, optimal_spread_scan, run_isolated_level,
    IsolatedLevel, SpreadScanConfig, SpreadScanRow, SpreadScanTable,
};
