//! Orchestration layer for the chart-trend pipeline.
//!
//! The `kline` binary wires the pure core crate to the filesystem and
//! network: `fetch` downloads OHLCV CSVs, `build` turns them into labeled
//! image datasets on disk, `train` fits the CNN and writes a checkpoint plus
//! a training history, `evaluate` scores a checkpoint on the test partition,
//! and `matrix` sweeps the split × variant × horizon grid into a results
//! table with SVG figures.

pub mod build_cmd;
pub mod checkpoint;
pub mod config;
pub mod evaluate;
pub mod fetch;
pub mod fsutil;
pub mod matrix;
pub mod pngio;
pub mod report;
pub mod store;
pub mod svg;
pub mod train_cmd;

use std::process::ExitCode;

/// Process-level error classes, mapped onto documented exit codes.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Bad invocation or configuration (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Missing, malformed, or insufficient data (exit 2).
    #[error("{0}")]
    Data(String),
    /// Training diverged (exit 3).
    #[error("{0}")]
    Divergence(String),
}

impl AppError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Usage(_) => ExitCode::from(1),
            AppError::Data(_) => ExitCode::from(2),
            AppError::Divergence(_) => ExitCode::from(3),
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        AppError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        AppError::Data(msg.into())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

pub type AppResult<T> = Result<T, AppError>;
