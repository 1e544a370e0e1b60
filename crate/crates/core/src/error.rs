use thiserror::Error;

/// Failure classes surfaced by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    /// Jet budget, environment, or scene configuration problem.
    #[error("configuration error: {0}")]
    Config(String),
    /// Non-finite value, singular metric, failed factorization.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Caller asked for something the operation does not support.
    #[error("usage error: {0}")]
    Usage(String),
    /// Rank-deficient immersion or degenerate frame.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// (k, n) outside an invariant's validity range.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
