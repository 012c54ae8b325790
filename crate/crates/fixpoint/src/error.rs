use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] fixpoint_core::Error),

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{failed} of {total} properties failed: {}", names.join(", "))]
    PropertiesFailed {
        failed: usize,
        total: usize,
        names: Vec<String>,
    },
}

impl Error {
    /// 1 for numerical and property failures, 2 for usage, config and file errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(_) | Error::PropertiesFailed { .. } => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
