use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = TrimError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TrimError {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A mask or query breaks the grouping contract of its transform.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("dictionary learning diverged (non-finite loss) at step {step}")]
    LearningDiverged { step: usize },

    #[error("exact Shapley enumeration supports at most {max} groups, got {groups}")]
    ShapleyGroupCap { groups: usize, max: usize },

    /// The prediction used for normalization was zero. Raw band scores are kept.
    #[error("cannot normalize by a zero prediction")]
    ZeroPrediction { raw_scores: Vec<f64> },

    #[error("coefficient layout {actual} does not match transform {expected}")]
    Layout { expected: String, actual: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {message}")]
    Format { context: String, message: String },

    #[error("config error: {0}")]
    Config(String),
}

impl TrimError {
    pub(crate) fn dim(
        context: &'static str,
        expected: impl ToString,
        actual: impl ToString,
    ) -> Self {
        TrimError::Dimension {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TrimError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(context: impl Into<String>, message: impl ToString) -> Self {
        TrimError::Format {
            context: context.into(),
            message: message.to_string(),
        }
    }
}
