use std::path::PathBuf;

use thiserror::Error;

use crate::fingerprint::FeatureSpace;

pub type Result<T> = std::result::Result<T, FfpError>;

#[derive(Debug, Error)]
pub enum FfpError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("feature space mismatch: expected {expected}, found {found}")]
    Domain { expected: FeatureSpace, found: FeatureSpace },

    #[error("build error: {0}")]
    Build(String),

    #[error("classification error: {0}")]
    Classification(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("evaluation aborted on instance `{id}`: {source}")]
    Instance {
        id: String,
        #[source]
        source: Box<FfpError>,
    },

    #[error("{}: line {line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("unsupported library format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl FfpError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FfpError::Io { path: path.into(), source }
    }

    /// True for errors caused by bad parameters rather than bad data.
    pub fn is_parameter_error(&self) -> bool {
        match self {
            FfpError::Parameter(_) => true,
            FfpError::Instance { source, .. } => source.is_parameter_error(),
            _ => false,
        }
    }
}
