//! Trial-matrix execution: one planner run per (N, S, backend, trial) cell
//! with deterministically derived seeds.

use std::path::PathBuf;

use berrt::{load_world, plan, BackendKind, PlannerConfig, World};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Benchmark matrix description.
#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub scenario: PathBuf,
    /// Label recorded with every run; defaults to the scenario file stem.
    pub scenario_label: String,
    pub n_values: Vec<usize>,
    pub s_values: Vec<usize>,
    pub backends: Vec<BackendKind>,
    /// Independent runs per cell.
    pub trials: usize,
    pub base_seed: u64,
    pub epsilon: f64,
    /// Worker threads for the parallel backend (0 = hardware parallelism).
    pub workers: usize,
    pub validate: bool,
}

impl TrialSpec {
    pub fn new(scenario: impl Into<PathBuf>) -> Self {
        let scenario: PathBuf = scenario.into();
        let scenario_label = scenario
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_string());
        TrialSpec {
            scenario,
            scenario_label,
            n_values: vec![1000],
            s_values: vec![1],
            backends: vec![BackendKind::Serial],
            trials: 5,
            base_seed: 0,
            epsilon: 1e-6,
            workers: 0,
            validate: false,
        }
    }
}

/// Cell outcome: ran, or skipped as infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Skipped,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunStatus::Ok => write!(f, "ok"),
            RunStatus::Skipped => write!(f, "skipped"),
        }
    }
}

/// One row of benchmark output. Timing fields are wall-clock seconds; the
/// non-timing fields are deterministic functions of the spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub n_samples: usize,
    pub batch_size: usize,
    pub backend: BackendKind,
    pub workers: usize,
    pub trial: usize,
    /// Seed actually fed to the planner (derived from the base seed and the
    /// cell coordinates).
    pub seed: u64,
    pub epsilon: f64,
    pub status: RunStatus,
    pub vertices: usize,
    pub edges: usize,
    pub replans: usize,
    /// Total policy iterations across all replans.
    pub policy_iterations: usize,
    pub explore_s: f64,
    pub exploit_s: f64,
    pub rebuild_s: f64,
    pub total_s: f64,
    /// None when the goal was not reached.
    pub path_cost: Option<f64>,
    pub path_edges: usize,
    /// Wall time of each replan, in order.
    pub replan_times_s: Vec<f64>,
    /// Policy iterations of each replan, in order.
    pub replan_iterations: Vec<usize>,
}

/// SplitMix64 finalizer; the documented seed-derivation mix.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn backend_id(b: BackendKind) -> u64 {
    match b {
        BackendKind::Serial => 0,
        BackendKind::Parallel => 1,
    }
}

/// Per-cell seed: fold the cell coordinates into the base seed one at a
/// time through SplitMix64, so every (N, S, backend, trial) cell gets an
/// independent, reproducible sample sequence.
pub fn derive_seed(base: u64, n: usize, s: usize, backend: BackendKind, trial: usize) -> u64 {
    let mut h = base;
    for v in [n as u64, s as u64, backend_id(backend), trial as u64] {
        h = splitmix64(h ^ v);
    }
    h
}

fn skipped_record(
    spec: &TrialSpec,
    n: usize,
    s: usize,
    backend: BackendKind,
    trial: usize,
) -> RunRecord {
    RunRecord {
        scenario: spec.scenario_label.clone(),
        n_samples: n,
        batch_size: s,
        backend,
        workers: spec.workers,
        trial,
        seed: derive_seed(spec.base_seed, n, s, backend, trial),
        epsilon: spec.epsilon,
        status: RunStatus::Skipped,
        vertices: 0,
        edges: 0,
        replans: 0,
        policy_iterations: 0,
        explore_s: 0.0,
        exploit_s: 0.0,
        rebuild_s: 0.0,
        total_s: 0.0,
        path_cost: None,
        path_edges: 0,
        replan_times_s: Vec::new(),
        replan_iterations: Vec::new(),
    }
}

/// Run one cell of the matrix against an already-loaded world.
pub fn run_cell(
    world: &World,
    spec: &TrialSpec,
    n: usize,
    s: usize,
    backend: BackendKind,
    trial: usize,
) -> Result<RunRecord, CliError> {
    let seed = derive_seed(spec.base_seed, n, s, backend, trial);
    let cfg = PlannerConfig {
        n_samples: n,
        batch_size: s,
        epsilon: spec.epsilon,
        seed,
        backend,
        workers: spec.workers,
        validate: spec.validate,
        ..Default::default()
    };
    let result = plan(world, &cfg)?;
    Ok(RunRecord {
        scenario: spec.scenario_label.clone(),
        n_samples: n,
        batch_size: s,
        backend,
        workers: spec.workers,
        trial,
        seed,
        epsilon: spec.epsilon,
        status: RunStatus::Ok,
        vertices: result.vertices.len(),
        edges: result.edges.len(),
        replans: result.per_replan.len(),
        policy_iterations: result.per_replan.iter().map(|r| r.iterations).sum(),
        explore_s: result.totals.explore.as_secs_f64(),
        exploit_s: result.totals.exploit.as_secs_f64(),
        rebuild_s: result.totals.rebuild.as_secs_f64(),
        total_s: result.totals.total.as_secs_f64(),
        path_cost: result.path_cost.is_finite().then_some(result.path_cost),
        path_edges: result.path.len().saturating_sub(1),
        replan_times_s: result
            .per_replan
            .iter()
            .map(|r| r.wall_time.as_secs_f64())
            .collect(),
        replan_iterations: result.per_replan.iter().map(|r| r.iterations).collect(),
    })
}

/// Execute the whole matrix sequentially (trials stay un-interleaved for
/// timing fidelity; the only parallelism is inside the backend under test).
/// Infeasible cells (S > N) produce skipped records and a warning on stderr.
pub fn run_matrix(spec: &TrialSpec) -> Result<Vec<RunRecord>, CliError> {
    let world = load_world(&spec.scenario)?;
    if spec.trials == 0 {
        return Err(CliError::InvalidSpec {
            reason: "trials must be at least 1".into(),
        });
    }
    let mut records = Vec::new();
    for &n in &spec.n_values {
        for &s in &spec.s_values {
            for &backend in &spec.backends {
                for trial in 0..spec.trials {
                    if s > n || s == 0 {
                        eprintln!(
                            "warning: skipping infeasible cell N={n} S={s} ({})",
                            if s == 0 {
                                "batch size zero"
                            } else {
                                "batch exceeds samples"
                            }
                        );
                        records.push(skipped_record(spec, n, s, backend, trial));
                        continue;
                    }
                    records.push(run_cell(&world, spec, n, s, backend, trial)?);
                }
            }
        }
    }
    Ok(records)
}
