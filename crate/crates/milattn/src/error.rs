use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] milattn_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    CoreAt {
        path: PathBuf,
        #[source]
        source: milattn_core::Error,
    },
    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("{path}: line {line}: {message}")]
    Csv { path: PathBuf, line: u64, message: String },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at(path: impl Into<PathBuf>, source: milattn_core::Error) -> Self {
        Error::CoreAt {
            path: path.into(),
            source,
        }
    }

    /// The core error behind this one, if any.
    pub fn core(&self) -> Option<&milattn_core::Error> {
        match self {
            Error::Core(e) | Error::CoreAt { source: e, .. } => Some(e),
            _ => None,
        }
    }
}
