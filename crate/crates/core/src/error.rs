use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input {path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// A record in a manifest violates a corpus invariant.
    #[error("record `{record}`, field `{field}`: {message}")]
    Ingest {
        record: String,
        field: &'static str,
        message: String,
    },

    #[error("empty prompt `{0}` cannot be aligned")]
    EmptyPrompt(String),

    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("recording `{0}` has no transcript")]
    MissingTranscript(String),

    #[error("recording `{recording}` has no hypothesis for system `{system}`")]
    UnknownSystem { recording: String, system: String },

    #[error("confidence {value} at position {index} is outside [0, 100]")]
    ConfidenceOutOfRange { index: usize, value: f64 },

    #[error("confusion matrix is empty")]
    EmptyMatrix,

    #[error("no usable recordings for system `{system}` ({skipped} skipped)")]
    NoUsableRecordings { system: String, skipped: usize },

    #[error("no recording carries confidence scores")]
    NoConfidences,

    #[error("{metric} is undefined at every threshold of the grid")]
    AllUndefined { metric: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn ingest(record: impl Into<String>, field: &'static str, message: impl Into<String>) -> Self {
        Error::Ingest {
            record: record.into(),
            field,
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end: 2 usage, 3 data, 4 computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::InvalidConfig(_) => 2,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Ingest { .. }
            | Error::EmptyPrompt(_)
            | Error::MissingTranscript(_)
            | Error::UnknownSystem { .. }
            | Error::ConfidenceOutOfRange { .. }
            | Error::NoUsableRecordings { .. }
            | Error::NoConfidences
            | Error::Serialize(_) => 3,
            Error::LengthMismatch { .. } | Error::EmptyMatrix | Error::AllUndefined { .. } => 4,
        }
    }
}
