use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: partial value {partial:e}, achieved tolerance {achieved:e} (requested {requested:e})")]
    Quadrature {
        partial: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("degenerate Lévy measure: {0}")]
    DegenerateMeasure(String),

    #[error("inconsistent bounds: lower {lower} exceeds upper {upper}")]
    InconsistentBounds { lower: f64, upper: f64 },

    #[error("simulation configuration: {0}")]
    Simulation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
