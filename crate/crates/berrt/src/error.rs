//! Error types shared across the planner.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("free-space sampling exhausted its rejection budget of {budget} attempts; world is degenerate")]
    SampleBudgetExhausted { budget: usize },
    #[error("nearest-neighbor query on an empty index")]
    EmptyIndex,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("staged edge ({src}, {dst}) references a vertex id >= {n_vertices}")]
    VertexOutOfRange {
        src: u32,
        dst: u32,
        n_vertices: usize,
    },
    #[error("duplicate edge ({src}, {dst}) staged")]
    DuplicateEdge { src: u32, dst: u32 },
    #[error("staging watermark would regress from {current} to {requested}")]
    WatermarkRegression { current: usize, requested: usize },
    #[error("parent pointers contain a cycle through vertex {vertex}")]
    ParentCycle { vertex: u32 },
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("replan failed to converge within {cap} policy iterations")]
    IterationCapExceeded { cap: usize },
    #[error("invalid planner configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("invalid world: {reason}")]
    InvalidWorld { reason: String },
    #[error("failed to build worker pool: {reason}")]
    WorkerPool { reason: String },
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}
