use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row} sums to zero; isolated nodes must be removed before normalization")]
    ZeroRow { row: usize },

    #[error("empty graph: matrix has no positive mass")]
    EmptyGraph,

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{what} not symmetric (max asymmetry {deviation:e})")]
    NotSymmetric { what: &'static str, deviation: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("reversibility violated: column {column} of V sums to {column_sum}, latent degree is {degree}")]
    Reversibility {
        column: usize,
        column_sum: f64,
        degree: f64,
    },

    #[error("loss undefined: reconstruction is zero at ({row}, {col}) where the input graph has mass")]
    LossDomain { row: usize, col: usize },

    #[error("symbol {symbol:?} is not in the alphabet")]
    UnknownSymbol { symbol: String },

    #[error("{path}:{line}: unknown phoneme {symbol:?}")]
    UnknownPhoneme { path: PathBuf, line: usize, symbol: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cluster label {label} out of range for {clusters} clusters")]
    LabelOutOfRange { label: usize, clusters: usize },

    #[error("no ground-truth class for node {node:?}")]
    MissingTruth { node: String },

    #[error("unknown node {node:?}")]
    UnknownNode { node: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed input rather than a failure while running.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::LossDomain { .. })
    }
}
