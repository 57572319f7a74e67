use thiserror::Error;

/// Errors produced by the estimation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of a mathematical function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// A configuration value violated its contract.
    #[error("configuration error: {0}")]
    Config(String),

    /// The performance function returned a value that cannot be compared
    /// against a threshold.
    #[error("model error: g(theta) = {value} is not finite")]
    NonFiniteModelOutput { value: f64 },

    /// All performance values at a level are identical, so no threshold
    /// can split them.
    #[error("degenerate level: all {count} performance values equal {value}")]
    DegenerateLevel { count: usize, value: f64 },

    /// The indicator sequences are constant, so the lag-0 autocovariance
    /// vanishes and the correlation factor is undefined.
    #[error("correlation factor undefined: indicator sequences are constant")]
    UndefinedCorrelation,

    /// A coefficient of variation was requested for a degenerate probability.
    #[error("coefficient of variation undefined for p = {0}")]
    UndefinedCov(f64),

    /// The product-of-betas series did not converge within the term cap.
    #[error(
        "series truncated at {terms} terms without converging \
         (partial sum {partial_sum:e}, last relative term {last_relative:e})"
    )]
    Truncation {
        terms: usize,
        partial_sum: f64,
        last_relative: f64,
    },

    /// Moment matching lost all precision (second moment not above the
    /// squared mean).
    #[error("precision loss: second moment {mu2:e} <= squared mean {mu1_sq:e}")]
    Precision { mu2: f64, mu1_sq: f64 },

    /// Numerical integration did not reach the requested tolerance.
    #[error("quadrature failed: estimate {estimate:e}, achieved error {achieved:e}")]
    Quadrature { estimate: f64, achieved: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
