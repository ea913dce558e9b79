use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("region too small: {0}")]
    Region(String),

    #[error("flux per plaquette B*h^2 = {0} exceeds pi (aliasing)")]
    FluxAliasing(f64),

    #[error("near-singular solve: pivot {pivot:e} at row {row}")]
    Singular { row: usize, pivot: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("incompatible grids")]
    GridMismatch,

    #[error("fit rejected: {0}")]
    Fit(String),

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
