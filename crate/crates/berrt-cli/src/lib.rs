//! Benchmark harness for the BERRT# planner: seed-controlled trial matrices
//! over problem size, batch size and exploitation backend, with aggregate
//! reporting and CSV/JSON emission.

pub mod harness;
pub mod report;

use thiserror::Error;

pub use harness::{derive_seed, run_matrix, RunRecord, RunStatus, TrialSpec};
pub use report::{emit, from_csv, from_json, summarize, to_csv, to_json, EmitFormat, Summary};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] berrt::ScenarioError),
    #[error(transparent)]
    Planner(#[from] berrt::PlannerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid trial spec: {reason}")]
    InvalidSpec { reason: String },
    #[error("format error: {reason}")]
    Format { reason: String },
}
