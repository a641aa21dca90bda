use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("t = {t} lies outside the support (0, {end})")]
    OutsideSupport { t: f64, end: f64 },

    #[error("t = {t} is below the series threshold t_min = {t_min}")]
    SmallTime { t: f64, t_min: f64 },

    #[error("series not converged at t = {t} after {terms} terms")]
    Truncation { t: f64, terms: usize },

    #[error("zero search failed for {family} at index {index}")]
    ZeroSearch { family: String, index: usize },

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not available: {0}")]
    Unavailable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation { .. }
                | Error::ZeroSearch { .. }
                | Error::Root(_)
                | Error::Quadrature(_)
                | Error::SmallTime { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
