use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("Jacobi identity fails (residual {residual:.3e}); offending triples: {offending}")]
    Jacobi { residual: f64, offending: String },

    #[error("3-form is not closed (|dH| residual {residual:.3e}); offending components: {offending}")]
    NotClosed { residual: f64, offending: String },

    #[error("index error: {0}")]
    Index(String),

    #[error("duplicate entry: {0}")]
    Duplicate(String),

    #[error("parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
