use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("design matrix is rank deficient (rank {rank} of {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("zero residual quadratic for output {output}: exact fit")]
    ZeroResidual { output: usize },

    #[error("centre {index} lies outside the admissible region")]
    OutsideRegion { index: usize },

    #[error("invalid value for `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 2 configuration error, 3 data error, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Dimension(_) | Error::Parse { .. } | Error::Io { .. } | Error::Json { .. } => 3,
            Error::RankDeficient { .. }
            | Error::NonFinite(_)
            | Error::ZeroResidual { .. }
            | Error::OutsideRegion { .. }
            | Error::Degenerate(_) => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
