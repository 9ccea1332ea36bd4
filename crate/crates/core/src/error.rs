use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of bounds: {detail}")]
    Bounds { what: &'static str, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolution mismatch: {0}")]
    Resolution(String),

    #[error("t0 is not a grid point: {0}")]
    Grid(String),

    #[error("insufficient data: {usable} usable scales, need at least {required}")]
    InsufficientData { usable: usize, required: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("incomparable ensembles: {0}")]
    Comparison(String),

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Help or version text requested on the command line.
    #[error("{0}")]
    Help(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn bounds(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Bounds { what, detail: detail.into() }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }
}
