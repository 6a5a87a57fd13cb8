use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("parse error at row {row}{}: {reason}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        row: usize,
        column: Option<usize>,
        reason: String,
    },

    #[error("label column holds {found} distinct values, expected exactly 2: {values:?}")]
    LabelCardinality { found: usize, values: Vec<String> },

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("class {0} has no training rows")]
    EmptyClass(crate::Label),

    #[error("targets contain a single class; both +1 and -1 are required")]
    DegenerateTarget,

    #[error("{0} needs class information that is not available in this phase")]
    PhaseMisuse(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear system is singular or ill-conditioned (estimated condition number {condition:.3e}, relative residual {residual:.3e})")]
    Conditioning { condition: f64, residual: f64 },

    #[error("bias is undetermined: e^T (K + rho I)^-1 e = {0:.3e}")]
    BiasDegenerate(f64),

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(expected: usize, found: usize) -> Self {
        Error::Shape { expected, found }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            err,
        }
    }
}
