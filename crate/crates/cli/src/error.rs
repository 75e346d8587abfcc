use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fourier3::Error),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Config { path: PathBuf, line: usize, message: String },

    #[error("{0}")]
    Manifest(String),

    #[error("grid spec: {0}")]
    Grid(String),

    #[error("{path}, record {record}: {message}")]
    Csv { path: String, record: u64, message: String },

    #[error("field file: {0}")]
    Field(String),

    #[error("thread pool: {0}")]
    Threads(String),
}

impl CliError {
    /// Short stable tag for the machine-readable error line.
    pub fn code(&self) -> &'static str {
        use fourier3::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::OutsideDomain { .. } => "outside-domain",
                E::MalformedSnapshot(_) => "snapshot",
                E::InvalidThreshold(_) => "threshold",
                E::InvalidNufftParams(_) => "nufft",
                E::Io(_) => "io",
                E::InvalidDomain { .. } | E::InvalidGridSize { .. } | E::ZeroDirection | E::InvalidConfig(_) => "config",
                _ => "internal",
            },
            CliError::File { .. } => "io",
            CliError::Config { .. } | CliError::Manifest(_) => "config",
            CliError::Grid(_) => "grid",
            CliError::Csv { .. } => "csv",
            CliError::Field(_) => "field",
            CliError::Threads(_) => "threads",
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::File { path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
