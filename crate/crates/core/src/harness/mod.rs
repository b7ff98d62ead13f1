//! Run configuration, comparisons between the limit law, the exact finite-k
//! law and Monte Carlo, and CSV/SVG/JSON output for the command-line tool.

mod commands;
mod config;
mod grid;
mod plot;

pub use commands::{
    run, ComparisonReport, ComparisonRow, ComparisonSummary, Outcome, COMPARE_CSV, MANIFEST_JSON,
};
pub use config::{default_k, Command, Manifest, RunConfig, Tolerances, DEFAULT_K_QMAX};
pub use grid::{default_grid, GridSpec, DEFAULT_GRID_POINTS, NUDGE};

use thiserror::Error;

use crate::cf::CfError;
use crate::sim::SimError;
use crate::theory::TheoryError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// 2 for configuration and i/o problems, 3 for precision exhaustion.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Precision(_) => 3,
            _ => 2,
        }
    }
}

impl From<CfError> for HarnessError {
    fn from(e: CfError) -> Self {
        match e {
            CfError::PrecisionExhausted | CfError::DepthExceeded { .. } => HarnessError::Precision(e.to_string()),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<SimError> for HarnessError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Cf(c) => c.into(),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<TheoryError> for HarnessError {
    fn from(e: TheoryError) -> Self {
        match e {
            TheoryError::Cf(c) => c.into(),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Config(e.to_string())
    }
}
