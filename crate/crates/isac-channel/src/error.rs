//! Error types shared across the simulator.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by channel construction, configuration, and export.
#[derive(Debug, Error)]
pub enum Error {
    /// Coincident points or a zero-length propagation leg.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Non-positive or non-finite carrier wavelength/frequency.
    #[error("invalid carrier: {0}")]
    InvalidCarrier(String),

    /// Invalid configuration, dimension mismatch, or infeasible request.
    #[error("config error: {0}")]
    Config(String),

    /// A channel with no power where power is required.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// I/O failure with the path that caused it.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for CLI reporting: 2 for config errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
