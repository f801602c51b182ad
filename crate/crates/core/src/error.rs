use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("translation failed{}: {message}", location.as_ref().map(|(d, s)| format!(" at document {d}, sentence {s}")).unwrap_or_default())]
    Translation {
        message: String,
        retryable: bool,
        location: Option<(String, usize)>,
    },

    #[error("capability not supported: {0}")]
    Capability(String),

    #[error("invalid metric input: {0}")]
    Metric(String),

    #[error("no claim labels to compute a distribution over")]
    EmptyDistribution,

    #[error("experiment stage `{stage}` failed: {message}")]
    Experiment { stage: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that may succeed on a later attempt (transport failures).
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Translation { retryable: true, .. })
    }
}
