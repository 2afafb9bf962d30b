use std::path::PathBuf;

/// Failure class, one per process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input or invalid configuration.
    Parse,
    /// Numerical failure in fitting or simulation.
    Fit,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Parse => 1,
            ErrorClass::Fit => 2,
            ErrorClass::Io => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorClass::Parse => "parse",
            ErrorClass::Fit => "fit",
            ErrorClass::Io => "io",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}:{line}: energy grid is not strictly ascending", path.display())]
    NonMonotonicGrid { path: PathBuf, line: usize },
    #[error("{}: no data rows", path.display())]
    EmptyFile { path: PathBuf },
    #[error("{}: {source}", path.display())]
    InvalidSpectrum { path: PathBuf, source: dephase_core::Error },
    #[error("{}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{context}: {source}")]
    Core { context: String, source: dephase_core::Error },
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn core(context: impl Into<String>, source: dephase_core::Error) -> Self {
        Error::Core { context: context.into(), source }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn class(&self) -> ErrorClass {
        use dephase_core::Error as E;
        match self {
            Error::Io { .. } => ErrorClass::Io,
            Error::Core { source: E::InvalidConfig(_) | E::Domain { .. }, .. } => ErrorClass::Parse,
            Error::Core { .. } => ErrorClass::Fit,
            _ => ErrorClass::Parse,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
