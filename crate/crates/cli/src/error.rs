use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] spherecover::Error),
    /// Bad flags, configuration or input files.
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.into(),
            source,
        }
    }

    /// 2 for input and parse errors, 3 for schema or model mismatches, 4
    /// for internal invariant violations.
    pub fn exit_code(&self) -> i32 {
        use spherecover::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::SchemaMismatch(_) | E::DimensionMismatch { .. } | E::UnusableModel => 3,
                E::Io { .. }
                | E::Parse { .. }
                | E::NonNumeric { .. }
                | E::Empty(_)
                | E::InvalidParameter(_)
                | E::SingletonClass(_)
                | E::TableRange(_)
                | E::Json(_) => 2,
            },
            CliError::Input(_) | CliError::Write { .. } => 2,
            CliError::Internal(_) => 4,
        }
    }
}
