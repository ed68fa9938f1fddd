use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong between reading a file and emitting an aggregate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("duplicate response for task `{task}` by worker `{worker}`")]
    DuplicateResponse { task: String, worker: String },
    #[error("no data rows in {0}")]
    EmptyFile(PathBuf),
    #[error("table has no rows")]
    EmptyTable,
    #[error("row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },
    #[error("masks of task `{0}` do not share one shape")]
    ShapeMismatch(String),
    #[error("unreadable mask {file}: {reason}")]
    UnreadableMask { file: PathBuf, reason: String },
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("missing dataset files: {}", .0.join(", "))]
    MissingFiles(Vec<String>),
    #[error("checksum mismatch for {file}: expected {expected}, got {actual}")]
    Checksum {
        file: String,
        expected: String,
        actual: String,
    },
    #[error("item `{0}` does not appear in any comparison")]
    UnusedItem(String),
    #[error("KOS can be applied to binary datasets only (got {0} labels)")]
    NotBinary(usize),
    #[error("worker co-annotation graph is disconnected")]
    NoOverlap,
    #[error("at least two workers are required")]
    TooFewWorkers,
    #[error("no responses to aggregate")]
    EmptyResponses,
    #[error("no unit has two or more responses")]
    NoCoincidences,
    #[error("aggregation result carries no posteriors")]
    MissingPosteriors,
    #[error("no prediction for `{0}`")]
    MissingPrediction(String),
    #[error("need at least two common items")]
    FewerThanTwoItems,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("method `{method}` cannot aggregate {modality} data")]
    ModalityMismatch { method: String, modality: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors raised by a method refusing otherwise valid input.
    pub fn is_method_error(&self) -> bool {
        matches!(
            self,
            Error::NotBinary(_)
                | Error::NoOverlap
                | Error::TooFewWorkers
                | Error::ModalityMismatch { .. }
                | Error::MissingPosteriors
                | Error::UnknownMethod(_)
        )
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let row = err.position().map(|p| p.line() as usize);
        match row {
            Some(row) => Error::InvalidRow {
                row,
                reason: err.to_string(),
            },
            None => Error::Parse(err.to_string()),
        }
    }
}
