use std::path::PathBuf;

/// Errors of the IO layer and command pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("{path}:{line}: {source}")]
    Data {
        path: PathBuf,
        line: u64,
        #[source]
        source: numur_core::Error,
    },
    #[error("{path}: {msg}")]
    Model { path: PathBuf, msg: String },
    #[error("missing artifact {path}: {hint}")]
    MissingArtifact { path: PathBuf, hint: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] numur_core::Error),
}

impl Error {
    /// Short machine-readable tag printed after `ERROR:`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Data { source, .. } | Error::Core(source) => core_code(source),
            Error::Model { .. } => "model",
            Error::MissingArtifact { .. } => "missing-artifact",
            Error::Config(_) => "config",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

fn core_code(e: &numur_core::Error) -> &'static str {
    use numur_core::Error as E;
    match e {
        E::DanglingId { .. } => "dangling-id",
        E::DuplicatePair { .. } => "duplicate-pair",
        E::Invalid(_) => "invalid-data",
        E::Config(_) => "config",
        E::Infeasible(_) => "infeasible",
        E::Shape(_) => "shape",
    }
}

pub type Result<T> = std::result::Result<T, Error>;
