use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("could not place site {site} after {attempts} attempts; the exclusion volume is too dense")]
    PlacementExhausted { site: usize, attempts: usize },

    #[error("sites {0} and {1} coincide; dipole coupling is singular")]
    CoincidentSites(usize, usize),

    #[error("statistic is undefined: {0}")]
    UndefinedStatistic(&'static str),

    #[error("environment regime is undefined: {0}")]
    UndefinedRegime(String),

    #[error("no steady state within tolerance (smallest singular value {smallest:.3e}, generator norm {norm:.3e})")]
    SolverFailure { smallest: f64, norm: f64 },

    #[error("network schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
