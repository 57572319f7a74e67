//! Numerical kernel shared by the rest of the crate.

pub mod beta;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use beta::{beta_pdf, BetaParams};
pub use rng::{derive_seed, sample_std_normal, Purpose, RngStream, StreamPath};
pub use special::{
    chi2_cdf, chi2_inv_cdf, chi2_inv_sf, chi2_sf, log_beta_fn, log_gamma, std_normal_cdf,
    std_normal_inv_cdf, std_normal_inv_sf, std_normal_pdf, std_normal_sf,
};
