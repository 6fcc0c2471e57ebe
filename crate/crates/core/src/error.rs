use crate::config::ConfigError;
use crate::dispersion::DispersionError;
use crate::jsa::JsaError;
use crate::metrics::MetricsError;
use crate::schmidt::SchmidtError;
use crate::sweep::SweepError;

/// Any failure raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Jsa(#[from] JsaError),
    #[error(transparent)]
    Schmidt(#[from] SchmidtError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dispersion(_) => "dispersion",
            Error::Jsa(_) => "jsa",
            Error::Schmidt(_) => "schmidt",
            Error::Metrics(_) => "metrics",
            Error::Sweep(_) => "sweep",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
