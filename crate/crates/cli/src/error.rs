use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] hetnet_core::Error),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// 2 for bad input, 3 for a numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        use hetnet_core::Error as E;
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) => 1,
            CliError::Core(e) => match e {
                E::Validation(_) | E::Parse { .. } | E::Domain(_) => 2,
                E::Quadrature { .. }
                | E::SolverNotConverged { .. }
                | E::TotalOutage
                | E::UnboundedRate
                | E::NoAccessibleChannels => 3,
            },
        }
    }
}
