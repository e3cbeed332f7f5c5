use glt_schwarz::assembly::AssemblyError;
use glt_schwarz::matrices::MatrixError;
use glt_schwarz::mm::MarketError;
use glt_schwarz::partition::PartitionError;
use glt_schwarz::schwarz::SchwarzError;
use glt_schwarz::spectra::SpectraError;
use std::io;
use std::path::PathBuf;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_ADMISSIBLE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;
pub const EXIT_NUMERICAL: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("nac: {0}")]
    NotAdmissible(PartitionError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: MarketError },
    #[error("registry: {0}")]
    Registry(String),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Schwarz(SchwarzError),
    #[error(transparent)]
    Spectra(SpectraError),
}

impl From<PartitionError> for CliError {
    fn from(e: PartitionError) -> Self {
        match e {
            PartitionError::NotAdmissible { .. } => CliError::NotAdmissible(e),
            PartitionError::InvalidArgument(msg) => CliError::Usage(msg),
        }
    }
}

impl From<SchwarzError> for CliError {
    fn from(e: SchwarzError) -> Self {
        match e {
            SchwarzError::Matrix(m) => CliError::Matrix(m),
            other => CliError::Schwarz(other),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Schwarz(s) => s.into(),
            other => CliError::Spectra(other),
        }
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotAdmissible(_) => EXIT_NOT_ADMISSIBLE,
            CliError::Io { .. } | CliError::Input { .. } => EXIT_IO,
            CliError::Usage(_) | CliError::Registry(_) | CliError::Assembly(_) => EXIT_USAGE,
            CliError::Schwarz(e) => match e {
                SchwarzError::SingularBlock { .. } => EXIT_NUMERICAL,
                _ => EXIT_USAGE,
            },
            CliError::Spectra(e) => match e {
                SpectraError::NoConvergence { .. } => EXIT_NUMERICAL,
                _ => EXIT_USAGE,
            },
            CliError::Matrix(e) => match e {
                MatrixError::Singular { .. } => EXIT_NUMERICAL,
                _ => EXIT_USAGE,
            },
        }
    }
}
