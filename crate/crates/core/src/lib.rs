//! Rare-event failure probabilities by Subset Simulation.
//!
//! A [`model::PerformanceModel`] defines `g(θ)` and the critical threshold
//! `b`; [`sss::run_subset_simulation`] estimates `P(g(θ) > b)` under i.i.d.
//! standard normal inputs with Modified Metropolis chains ([`mma`]); the
//! [`bayes`] module turns the level counts into a posterior for the failure
//! probability.

pub mod app;
pub mod bayes;
pub mod error;
pub mod math;
pub mod mma;
pub mod model;
pub mod sss;

pub use error::{Error, Result};
