use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function, e.g. `log_gamma(0)`.
    #[error("domain error: {0}")]
    Domain(String),

    /// An index or continuous parameter lies outside its admissible range.
    #[error("range error: {0}")]
    Range(String),

    /// A weight configuration violates `alpha_i > -1` or has the wrong arity.
    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    /// A spectral operator would need content above the stored band.
    #[error("band exceeded: {0}")]
    BandExceeded(String),

    /// A quantity such as `1 - mu` collapsed below working precision.
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    /// A quadrature rule or basis could not be built.
    #[error("construction failed: {0}")]
    Construction(String),

    /// Mismatched inputs, e.g. a rule built for a different weight.
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
