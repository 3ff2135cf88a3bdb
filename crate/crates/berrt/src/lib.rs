//! Optimal sampling-based motion planning with policy-iteration exploitation.
//!
//! This crate implements the PI-RRT# planner and its batched-extension
//! variant BERRT# for 2D polygonal worlds. Exploration grows a graph by
//! random sampling and steering; exploitation propagates shortest-path
//! information by alternating local policy improvement with breadth-first
//! policy evaluation over the promising set. Two interchangeable backends
//! execute exploitation: a serial sweep and a host-side data-parallel
//! implementation producing bit-identical results.
//!
//! Storage follows a transfer-friendly design: vertex properties in
//! structure-of-arrays form, new edges appended to a coordinate list, and a
//! compressed-sparse-row adjacency rebuilt by radix sort + merge once per
//! replan.
//!
//! ```
//! use berrt::{plan, PlannerConfig, World, Bounds, State};
//!
//! let world = World {
//!     bounds: Bounds { xmin: 0.0, ymin: 0.0, xmax: 1.0, ymax: 1.0 },
//!     obstacles: vec![],
//!     x_init: State::new(0.1, 0.1),
//!     x_goal: State::new(0.9, 0.9),
//! };
//! let cfg = PlannerConfig { n_samples: 500, batch_size: 25, seed: 1, ..Default::default() };
//! let result = plan(&world, &cfg).unwrap();
//! assert!(result.path_cost.is_finite());
//! ```

pub mod error;
pub mod graph;
pub mod index;
pub mod parallel;
pub mod planner;
pub mod scenario;
pub mod world;

pub use error::{GraphError, PlannerError, ScenarioError, WorldError};
pub use graph::{rebuild_csr, CsrGraph, EdgeBatch, VertexId, VertexStore, NO_PARENT};
pub use index::SpatialIndex;
pub use parallel::{evaluate_parallel, improve_parallel, Frontier, StagingBuffer, WorkerPool};
pub use planner::{
    evaluate_serial, improve_serial, plan, BackendKind, ExtendOutcome, PhaseTotals, PlanResult,
    Planner, PlannerConfig, ReplanScope, ReplanStats, RunSnapshot, GOAL_ID, INIT_ID,
};
pub use scenario::{load_world, parse_world, to_document};
pub use world::{cost, segment_collides, Bounds, Polygon, State, World, DEFAULT_SAMPLE_BUDGET};
