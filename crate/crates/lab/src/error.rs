use std::{io, path::PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Malformed configuration text; `line` is 1-based, 0 when the problem
    /// is not tied to a line (e.g. a missing key).
    #[error("config line {line}, field `{field}`: {reason}")]
    Config {
        line: usize,
        field: String,
        reason: String,
    },
    #[error("{context} {}: {source}", path.display())]
    Io {
        context: &'static str,
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("replica {replica}: {source}")]
    Replica {
        replica: usize,
        #[source]
        source: sbp_core::Error,
    },
    #[error(transparent)]
    Core(#[from] sbp_core::Error),
    #[error("unsupported schema version {found} (expected {expected})")]
    Schema { found: String, expected: u64 },
    #[error("{}: line {line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    pub(crate) fn io(context: &'static str, path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| LabError::Io {
            context,
            path,
            source,
        }
    }

    pub fn config(line: usize, field: &str, reason: impl Into<String>) -> Self {
        LabError::Config {
            line,
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
