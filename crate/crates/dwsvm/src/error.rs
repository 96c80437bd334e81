use std::path::PathBuf;

/// Failures of the command-line tools and experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    /// Process exit code: 2 config, 3 data, 4 numerical, 5 i/o.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Data(_) => 3,
            AppError::Numerical(_) => 4,
            AppError::Io { .. } => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<dwsvm_core::Error> for AppError {
    fn from(e: dwsvm_core::Error) -> Self {
        match e {
            dwsvm_core::Error::Numerical(_) => AppError::Numerical(e.to_string()),
            _ => AppError::Data(e.to_string()),
        }
    }
}
