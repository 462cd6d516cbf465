use thiserror::Error;

/// Errors produced by the core numerics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("chain length {n_sites} is below the minimum of {min} sites")]
    TooFewSites { n_sites: usize, min: usize },

    #[error("chain length {n_sites} exceeds the address budget of {cap} sites")]
    TooManySites { n_sites: usize, cap: usize },

    #[error("site {site} is out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver did not converge for a {dimension}x{dimension} matrix (residual {residual:e})")]
    NoConvergence { dimension: usize, residual: f64 },

    #[error("Krylov propagation failed after {halvings} step halvings (estimated error {error:e} at dt = {dt:e})")]
    KrylovBreakdown { halvings: usize, error: f64, dt: f64 },

    #[error("too few distinct levels: {found} (need at least {needed})")]
    TooFewLevels { found: usize, needed: usize },

    #[error("spectrum is fully degenerate")]
    DegenerateSpectrum,

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("curve never crosses threshold {threshold}")]
    NoCrossing { threshold: f64 },

    #[error("fit needs at least {needed} points, got {found}")]
    TooFewPoints { found: usize, needed: usize },

    #[error("fit input contains a non-positive value {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("fit abscissae are degenerate")]
    DegenerateAbscissa,

    #[error("grid has no finite entries")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
