use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(metaline_core::Error),
}

impl CliError {
    /// 2 for bad input or file-system trouble, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<metaline_core::Error> for CliError {
    fn from(e: metaline_core::Error) -> Self {
        use metaline_core::Error as E;
        match e {
            // these arise from values the user supplied
            E::Validation(_) | E::Domain(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}
