use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a finite number")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    Ragged {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("empty label set")]
    EmptyItems,

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("asymmetric matrix at ({i}, {j}): {upper} vs {lower}")]
    Asymmetric {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
    },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("need at least {needed} items, got {got}")]
    TooFewItems { needed: usize, got: usize },

    #[error("zero-norm vector {0:?} under cosine distance")]
    ZeroNorm(String),

    #[error("zero-variance vector {0:?} under correlation distance")]
    ZeroVariance(String),

    #[error("constant distance matrix {0:?}: lower triangle has zero variance")]
    ConstantMatrix(String),

    #[error("invalid prompt template: {0}")]
    Template(String),

    #[error("cannot parse similarity from response {raw:?}: {reason}")]
    Unparseable { raw: String, reason: String },

    #[error("provider error: {0}")]
    Provider(String),

    #[error("harvest incomplete: {failed} of {total} pairs failed")]
    HarvestIncomplete { failed: usize, total: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown label {0:?} in group specification")]
    UnknownGroupLabel(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable snake_case identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Format { .. } => "format",
            Error::NonNumeric { .. } => "non_numeric",
            Error::Ragged { .. } => "ragged",
            Error::DuplicateLabel(_) => "duplicate_label",
            Error::EmptyItems => "empty_items",
            Error::LabelMismatch(_) => "label_mismatch",
            Error::Asymmetric { .. } => "asymmetric",
            Error::InvalidMatrix(_) => "invalid_matrix",
            Error::TooFewItems { .. } => "too_few_items",
            Error::ZeroNorm(_) => "zero_norm",
            Error::ZeroVariance(_) => "zero_variance",
            Error::ConstantMatrix(_) => "constant_matrix",
            Error::Template(_) => "template",
            Error::Unparseable { .. } => "unparseable",
            Error::Provider(_) => "provider",
            Error::HarvestIncomplete { .. } => "harvest_incomplete",
            Error::Config(_) => "config",
            Error::UnknownGroupLabel(_) => "unknown_group_label",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
