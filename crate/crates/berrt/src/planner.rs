//! Planner core: graph extension by random sampling (exploration), policy
//! iteration over the promising set (exploitation), the batched outer loop,
//! and solution-path extraction.
//!
//! Exploitation alternates two passes until the largest per-vertex
//! improvement falls below the convergence tolerance:
//!
//! * Improve: every worked vertex scans its outgoing edges for the cheapest
//!   parent under the current cost-to-come estimates and rewires to it on
//!   strict improvement (Jacobi-style, all vertices against the same
//!   snapshot). Costs-to-come are not written here.
//! * Evaluate: a breadth-first walk of the policy tree from the root
//!   recomputes consistent costs-to-come and rebuilds the promising set,
//!   pruning branches that can no longer beat the current goal cost.
//!
//! In-loop replans work the promising set plus the goal vertex (the goal can
//! never satisfy the promising test itself, but it must still pull its best
//! parent). The final replan after sampling works every vertex and walks the
//! whole tree so the answer matches a shortest-path query over the complete
//! staged graph.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GraphError, PlannerError};
use crate::graph::{CsrGraph, EdgeBatch, VertexId, VertexStore};
use crate::index::SpatialIndex;
use crate::parallel::{self, Frontier, StagingBuffer, WorkerPool};
use crate::world::{cost, segment_collides, State, World, DEFAULT_SAMPLE_BUDGET};

/// Vertex id of the initial state (always inserted first).
pub const INIT_ID: VertexId = 0;
/// Vertex id of the goal state (always inserted second).
pub const GOAL_ID: VertexId = 1;

/// Which exploitation backend executes Improve and Evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Serial,
    Parallel,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendKind::Serial => write!(f, "serial"),
            BackendKind::Parallel => write!(f, "parallel"),
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serial" => Ok(BackendKind::Serial),
            "parallel" => Ok(BackendKind::Parallel),
            other => Err(format!(
                "unknown backend `{other}` (expected serial|parallel)"
            )),
        }
    }
}

/// Run parameters. `steer_range` and `gamma` default from the world geometry
/// when left unset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Total number of extension attempts (N).
    pub n_samples: usize,
    /// Extensions per batch between replans (S); 1 recovers the
    /// replan-every-sample planner.
    pub batch_size: usize,
    /// Convergence tolerance on the per-iteration improvement bound.
    pub epsilon: f64,
    /// Maximum extension length; defaults to a tenth of the bounds diagonal.
    pub steer_range: Option<f64>,
    /// Near-radius scale; defaults to 1.1 * sqrt(3 * free_area / pi), the
    /// standard connectivity bound for optimal sampling-based planners in 2D.
    pub gamma: Option<f64>,
    pub seed: u64,
    pub backend: BackendKind,
    /// Worker threads for the parallel backend; 0 means hardware parallelism.
    pub workers: usize,
    /// Enable internal invariant checks (duplicate edges, cycles, frontier
    /// uniqueness, staging watermark).
    pub validate: bool,
    /// Rejection-sampling budget per free-space sample.
    pub sample_budget: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            n_samples: 1000,
            batch_size: 1,
            epsilon: 1e-6,
            steer_range: None,
            gamma: None,
            seed: 0,
            backend: BackendKind::Serial,
            workers: 0,
            validate: false,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
        }
    }
}

/// The promising test: can `v` still lie on a path at least as good as the
/// incumbent? Unreached vertices never qualify.
#[inline]
pub(crate) fn is_promising(g: f64, h: f64, g_goal: f64) -> bool {
    g.is_finite() && g + h <= g_goal
}

/// Per-replan measurements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplanStats {
    /// Policy iterations executed (Improve count).
    pub iterations: usize,
    /// Improvement bound after each iteration; the last entry is below the
    /// tolerance on normal termination.
    pub delta_g_trace: Vec<f64>,
    pub wall_time: Duration,
    /// Portion of `wall_time` spent merging staged edges into the CSR.
    pub rebuild_time: Duration,
    /// Goal cost-to-come when the replan finished.
    pub goal_cost_after: f64,
    /// Edge count of the goal path when finite.
    pub goal_path_edges_after: Option<usize>,
}

/// Wall-clock phase breakdown for a whole run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PhaseTotals {
    pub explore: Duration,
    pub exploit: Duration,
    pub rebuild: Duration,
    pub total: Duration,
}

/// Everything a finished run produces: the solution path, timing breakdown,
/// per-replan traces, and the full graph for offline checks.
#[derive(Debug, Clone)]
pub struct PlanResult {
    /// States from the initial state to the goal; empty when unreachable.
    pub path: Vec<State>,
    /// Cost of `path`, +inf when the goal was not reached.
    pub path_cost: f64,
    pub per_replan: Vec<ReplanStats>,
    pub totals: PhaseTotals,
    pub vertices: VertexStore,
    pub edges: EdgeBatch,
    /// Promising set after the final replan, in discovery order.
    pub promising_set: Vec<VertexId>,
    /// Extension attempts that added a vertex.
    pub extensions_added: usize,
}

/// Bit-exact digest of the non-timing run outputs, for determinism and
/// backend-equivalence comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSnapshot {
    pub states: Vec<(u64, u64)>,
    pub g: Vec<u64>,
    pub h: Vec<u64>,
    pub parent: Vec<u32>,
    pub promising: Vec<bool>,
    pub edges: Vec<(u32, u32, u64)>,
    pub promising_set: Vec<VertexId>,
    pub delta_traces: Vec<Vec<u64>>,
    pub path_cost: u64,
}

impl PlanResult {
    pub fn snapshot(&self) -> RunSnapshot {
        RunSnapshot {
            states: self
                .vertices
                .states
                .iter()
                .map(|s| (s.x.to_bits(), s.y.to_bits()))
                .collect(),
            g: self.vertices.g.iter().map(|v| v.to_bits()).collect(),
            h: self.vertices.h.iter().map(|v| v.to_bits()).collect(),
            parent: self.vertices.parent_raw().to_vec(),
            promising: self.vertices.promising.clone(),
            edges: (0..self.edges.len())
                .map(|i| {
                    let (s, d, c) = self.edges.triple(i);
                    (s, d, c.to_bits())
                })
                .collect(),
            promising_set: self.promising_set.clone(),
            delta_traces: self
                .per_replan
                .iter()
                .map(|r| r.delta_g_trace.iter().map(|d| d.to_bits()).collect())
                .collect(),
            path_cost: self.path_cost.to_bits(),
        }
    }
}

/// Outcome of one extension attempt.
#[derive(Debug, Clone, Copy)]
pub struct ExtendOutcome {
    pub added: Option<VertexId>,
    pub promising: bool,
    /// Directed edges staged by this extension.
    pub staged_edges: usize,
}

/// Scope of one replan invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplanScope {
    /// Work the promising set plus the goal; prune the evaluation walk at
    /// vertices that can no longer beat the incumbent. Converges to the
    /// optimum over promising-reachable vertices.
    Promising,
    /// Work every vertex and walk the whole policy tree, iterating to an
    /// exact fixed point: a full shortest-path query over the staged graph.
    CompleteGraph,
}

/// One local policy improvement sweep over `work`: each vertex rewires to its
/// cheapest in-edge under the current costs-to-come (strict improvement only,
/// ties to the lowest neighbor id). Returns the largest improvement found.
/// Costs-to-come are not modified.
pub fn improve_serial(csr: &CsrGraph, vs: &mut VertexStore, work: &[VertexId]) -> f64 {
    let mut delta = 0.0f64;
    for &v in work {
        let g_v = vs.g[v as usize];
        let mut best = g_v;
        let mut best_parent = u32::MAX;
        let (dst, costs) = csr.out_edges(v);
        for i in 0..dst.len() {
            let via = vs.g[dst[i] as usize] + costs[i];
            if via < best {
                best = via;
                best_parent = dst[i];
            }
        }
        if best_parent != u32::MAX {
            vs.set_parent(v, Some(best_parent));
            // unreached vertices gaining a first parent improve by +inf
            let improvement = g_v - best;
            if improvement > delta {
                delta = improvement;
            }
        }
    }
    delta
}

/// Breadth-first policy evaluation from the root: recompute costs-to-come
/// level by level and rebuild the promising set. With `gated` set, children
/// failing the promising test are pruned from the walk (their subtrees keep
/// stale costs and drop out of the promising set); otherwise the whole tree
/// is walked and the test only decides promising membership.
///
/// The goal cost used by the test is snapshotted once per level, which makes
/// the serial and data-parallel backends bit-identical.
pub fn evaluate_serial(
    csr: &CsrGraph,
    vs: &mut VertexStore,
    promising_set: &mut Vec<VertexId>,
    gated: bool,
    validate: bool,
) -> Result<(), GraphError> {
    if validate {
        crate::graph::check_policy_forest(vs)?;
    }
    for &v in promising_set.iter() {
        vs.promising[v as usize] = false;
    }
    promising_set.clear();

    let mut frontier = Frontier::new(INIT_ID);
    let mut visited = if validate {
        vec![false; vs.len()]
    } else {
        Vec::new()
    };
    while !frontier.current.is_empty() {
        let g_goal = vs.g[GOAL_ID as usize];
        let Frontier { current, next } = &mut frontier;
        next.clear();
        for &v in current.iter() {
            let g_v = vs.g[v as usize];
            let (dst, costs) = csr.out_edges(v);
            for i in 0..dst.len() {
                let n = dst[i];
                if vs.parent_raw()[n as usize] != v {
                    continue;
                }
                let g_n = g_v + costs[i];
                vs.g[n as usize] = g_n;
                let pass = if cfg!(feature = "parent-gate") {
                    vs.h[v as usize] + g_v < g_goal
                } else {
                    is_promising(g_n, vs.h[n as usize], g_goal)
                };
                // the goal never joins the promising set; the ungated walk
                // still expands it so beyond-goal subtrees stay consistent
                let push = if pass && n != GOAL_ID {
                    vs.promising[n as usize] = true;
                    promising_set.push(n);
                    true
                } else {
                    !gated
                };
                if push {
                    if validate {
                        // each vertex enters the frontier at most once
                        if visited[n as usize] {
                            return Err(GraphError::ParentCycle { vertex: n });
                        }
                        visited[n as usize] = true;
                    }
                    next.push(n);
                }
            }
        }
        frontier.swap();
    }
    Ok(())
}

struct PlannerTimers {
    explore: Duration,
    exploit: Duration,
    rebuild: Duration,
}

/// Incremental planner state. `plan` drives it through the batched outer
/// loop; tests and reference loops may drive it step by step.
pub struct Planner<'w> {
    world: &'w World,
    cfg: PlannerConfig,
    vs: VertexStore,
    edges: EdgeBatch,
    staging: StagingBuffer,
    csr: CsrGraph,
    index: SpatialIndex,
    promising_set: Vec<VertexId>,
    rng: ChaCha8Rng,
    pool: Option<WorkerPool>,
    eta: f64,
    gamma: f64,
    per_replan: Vec<ReplanStats>,
    timers: PlannerTimers,
    extensions_added: usize,
}

impl<'w> Planner<'w> {
    pub fn new(world: &'w World, cfg: &PlannerConfig) -> Result<Self, PlannerError> {
        if cfg.batch_size == 0 {
            return Err(PlannerError::InvalidConfig {
                reason: "batch_size must be at least 1".into(),
            });
        }
        if cfg.n_samples > 0 && cfg.batch_size > cfg.n_samples {
            return Err(PlannerError::InvalidConfig {
                reason: format!(
                    "batch_size {} exceeds n_samples {}",
                    cfg.batch_size, cfg.n_samples
                ),
            });
        }
        if !cfg.epsilon.is_finite() || cfg.epsilon < 0.0 {
            return Err(PlannerError::InvalidConfig {
                reason: "epsilon must be finite and nonnegative".into(),
            });
        }
        if !world.x_init.is_finite() || !world.state_free(world.x_init) {
            return Err(PlannerError::InvalidWorld {
                reason: "initial state is not in free space".into(),
            });
        }
        if !world.x_goal.is_finite() || !world.state_free(world.x_goal) {
            return Err(PlannerError::InvalidWorld {
                reason: "goal state is not in free space".into(),
            });
        }

        let diag = f64::hypot(world.bounds.width(), world.bounds.height());
        let eta = cfg.steer_range.unwrap_or(0.1 * diag);
        let gamma = cfg
            .gamma
            .unwrap_or_else(|| 1.1 * (3.0 * world.free_area() / std::f64::consts::PI).sqrt());
        if eta <= 0.0 || gamma <= 0.0 {
            return Err(PlannerError::InvalidConfig {
                reason: "steer_range and gamma must be positive".into(),
            });
        }

        let mut vs = VertexStore::new();
        let mut index = SpatialIndex::new(world.bounds);
        let init = vs.add_vertex(world.x_init, 0.0, world.heuristic(world.x_init), None);
        index.insert(world.x_init);
        let goal = vs.add_vertex(world.x_goal, f64::INFINITY, 0.0, None);
        index.insert(world.x_goal);
        debug_assert_eq!(init, INIT_ID);
        debug_assert_eq!(goal, GOAL_ID);

        let pool = match cfg.backend {
            BackendKind::Serial => None,
            BackendKind::Parallel => Some(WorkerPool::new(cfg.workers)?),
        };

        Ok(Planner {
            world,
            cfg: cfg.clone(),
            vs,
            edges: if cfg.validate {
                EdgeBatch::with_validation()
            } else {
                EdgeBatch::new()
            },
            staging: StagingBuffer::new(),
            csr: CsrGraph::empty(2),
            index,
            promising_set: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            pool,
            eta,
            gamma,
            per_replan: Vec::new(),
            timers: PlannerTimers {
                explore: Duration::ZERO,
                exploit: Duration::ZERO,
                rebuild: Duration::ZERO,
            },
            extensions_added: 0,
        })
    }

    pub fn vertices(&self) -> &VertexStore {
        &self.vs
    }

    pub fn edges(&self) -> &EdgeBatch {
        &self.edges
    }

    pub fn promising_set(&self) -> &[VertexId] {
        &self.promising_set
    }

    pub fn goal_cost(&self) -> f64 {
        self.vs.g[GOAL_ID as usize]
    }

    /// Replace the graph state wholesale, resetting the staging watermark so
    /// the next replan consumes every edge. Scaffolding for exploitation
    /// tests on synthetic graphs; the spatial index is left untouched, so
    /// `extend` must not be called afterwards.
    #[doc(hidden)]
    pub fn splice_graph_for_tests(
        &mut self,
        vs: VertexStore,
        edges: EdgeBatch,
        promising: Vec<VertexId>,
    ) {
        self.vs = vs;
        self.edges = edges;
        self.promising_set = promising;
        self.staging = StagingBuffer::new();
        self.csr = CsrGraph::empty(self.vs.len());
    }

    /// Connection radius for the current vertex count.
    pub fn near_radius(&self) -> f64 {
        let n = self.vs.len() as f64;
        (self.gamma * (n.ln() / n).sqrt()).min(self.eta)
    }

    /// One exploration step: sample, steer from the nearest vertex, and on a
    /// collision-free connection insert the new vertex wired to its locally
    /// optimal in-radius neighbor, staging every collision-free neighbor edge
    /// in both directions. Failed attempts leave the graph untouched.
    pub fn extend(&mut self) -> Result<ExtendOutcome, PlannerError> {
        let x_rand = self
            .world
            .sample_free(&mut self.rng, self.cfg.sample_budget)?;
        let nearest = self.index.nearest(x_rand)?;
        let s_near = self.vs.states[nearest as usize];
        let dist = cost(s_near, x_rand);
        let x_new = if dist <= self.eta {
            x_rand
        } else {
            let t = self.eta / dist;
            State::new(
                s_near.x + (x_rand.x - s_near.x) * t,
                s_near.y + (x_rand.y - s_near.y) * t,
            )
        };
        if segment_collides(s_near, x_new, self.world) {
            return Ok(ExtendOutcome {
                added: None,
                promising: false,
                staged_edges: 0,
            });
        }

        let radius = self.near_radius();
        let candidates = self.index.near(x_new, radius);
        let mut connections: Vec<(VertexId, f64)> = Vec::with_capacity(candidates.len());
        let mut best_g = f64::INFINITY;
        let mut best_parent: Option<VertexId> = None;
        for n in candidates {
            let s_n = self.vs.states[n as usize];
            if segment_collides(s_n, x_new, self.world) {
                continue;
            }
            let c = cost(s_n, x_new);
            let via = self.vs.g[n as usize] + c;
            if via < best_g {
                best_g = via;
                best_parent = Some(n);
            }
            connections.push((n, c));
        }
        if connections.is_empty() {
            // nothing reachable within the connection radius
            return Ok(ExtendOutcome {
                added: None,
                promising: false,
                staged_edges: 0,
            });
        }

        let h_new = self.world.heuristic(x_new);
        let id = self.vs.add_vertex(x_new, best_g, h_new, best_parent);
        self.index.insert(x_new);
        self.extensions_added += 1;
        for &(n, c) in &connections {
            self.edges.push(id, n, c)?;
            self.edges.push(n, id, c)?;
        }
        let promising = is_promising(best_g, h_new, self.vs.g[GOAL_ID as usize]);
        if promising {
            self.vs.promising[id as usize] = true;
            self.promising_set.push(id);
        }
        Ok(ExtendOutcome {
            added: Some(id),
            promising,
            staged_edges: connections.len() * 2,
        })
    }

    fn improve(&mut self, work: &[VertexId]) -> f64 {
        match &self.pool {
            None => improve_serial(&self.csr, &mut self.vs, work),
            Some(pool) => parallel::improve_parallel(pool, &self.csr, &mut self.vs, work),
        }
    }

    fn evaluate(&mut self, gated: bool) -> Result<(), GraphError> {
        match &self.pool {
            None => evaluate_serial(
                &self.csr,
                &mut self.vs,
                &mut self.promising_set,
                gated,
                self.cfg.validate,
            ),
            Some(pool) => parallel::evaluate_parallel(
                pool,
                &self.csr,
                &mut self.vs,
                &mut self.promising_set,
                gated,
                self.cfg.validate,
            ),
        }
    }

    /// Policy iteration to convergence over the chosen scope. Consumes the
    /// staged edge segment into the CSR exactly once, up front.
    pub fn replan(&mut self, scope: ReplanScope) -> Result<&ReplanStats, PlannerError> {
        let t0 = Instant::now();
        self.csr = self
            .staging
            .sync_and_rebuild(&self.edges, &self.csr, self.vs.len())?;
        let t1 = Instant::now();

        let gated = scope == ReplanScope::Promising;
        // In-loop replans stop at the tolerance; the complete-graph query
        // iterates to the exact fixed point so no improvement is left behind.
        let epsilon = match scope {
            ReplanScope::Promising => self.cfg.epsilon,
            ReplanScope::CompleteGraph => 0.0,
        };
        // far beyond any legitimate convergence; exceeding it is a bug
        let cap = 10 * self.vs.len();
        let mut trace = Vec::new();
        let complete_work: Option<Vec<VertexId>> = match scope {
            ReplanScope::CompleteGraph => Some((0..self.vs.len() as VertexId).collect()),
            ReplanScope::Promising => None,
        };
        loop {
            let delta = match &complete_work {
                Some(all) => self.improve(all),
                None => {
                    // the goal can never pass the promising test but must
                    // still pull its best parent
                    let mut work = self.promising_set.clone();
                    work.push(GOAL_ID);
                    self.improve(&work)
                }
            };
            trace.push(delta);
            if delta == 0.0 || delta < epsilon {
                break;
            }
            if trace.len() >= cap {
                return Err(PlannerError::IterationCapExceeded { cap });
            }
            self.evaluate(gated)?;
        }

        let wall = t0.elapsed();
        let rebuild = t1.duration_since(t0);
        self.timers.rebuild += rebuild;
        self.timers.exploit += wall.saturating_sub(rebuild);
        let goal_cost = self.goal_cost();
        let path_edges = goal_cost
            .is_finite()
            .then(|| self.vs.ancestry(GOAL_ID).map(|c| c.len() - 1))
            .transpose()?;
        self.per_replan.push(ReplanStats {
            iterations: trace.len(),
            delta_g_trace: trace,
            wall_time: wall,
            rebuild_time: rebuild,
            goal_cost_after: goal_cost,
            goal_path_edges_after: path_edges,
        });
        Ok(self.per_replan.last().unwrap())
    }

    /// Goal-rooted branch of the policy tree, root first. Empty when the
    /// goal is unreached.
    pub fn extract_path(&self) -> Result<(Vec<State>, f64), PlannerError> {
        let goal_cost = self.goal_cost();
        if !goal_cost.is_finite() {
            return Ok((Vec::new(), f64::INFINITY));
        }
        let mut chain = self.vs.ancestry(GOAL_ID)?;
        chain.reverse();
        debug_assert_eq!(chain.first(), Some(&INIT_ID));
        let path = chain.iter().map(|&v| self.vs.states[v as usize]).collect();
        Ok((path, goal_cost))
    }

    /// Finish the run: extract the path and assemble the result.
    pub fn finish(mut self, total: Duration) -> Result<PlanResult, PlannerError> {
        let (path, path_cost) = self.extract_path()?;
        Ok(PlanResult {
            path,
            path_cost,
            per_replan: std::mem::take(&mut self.per_replan),
            totals: PhaseTotals {
                explore: self.timers.explore,
                exploit: self.timers.exploit,
                rebuild: self.timers.rebuild,
                total,
            },
            vertices: self.vs,
            edges: self.edges,
            promising_set: self.promising_set,
            extensions_added: self.extensions_added,
        })
    }

    /// Timed wrapper around `extend` used by the outer loop.
    fn extend_timed(&mut self) -> Result<ExtendOutcome, PlannerError> {
        let t = Instant::now();
        let out = self.extend();
        self.timers.explore += t.elapsed();
        out
    }
}

/// Run the batched planner: ceil(N / S) batches of S extensions, replanning
/// after a batch whenever the promising set grew, and a final unconditional
/// replan over the complete graph (which subsumes the last batch's replan).
/// With S = 1 this is the replan-every-promising-sample planner; with S = N
/// all sampling happens first and the single final query resolves the graph.
pub fn plan(world: &World, cfg: &PlannerConfig) -> Result<PlanResult, PlannerError> {
    let t_start = Instant::now();
    let mut planner = Planner::new(world, cfg)?;
    let n = cfg.n_samples;
    let s = cfg.batch_size;
    let batches = n.div_ceil(s.max(1));
    for k in 0..batches {
        let before = planner.promising_set.len();
        let this_batch = s.min(n - k * s);
        for _ in 0..this_batch {
            planner.extend_timed()?;
        }
        let last = k + 1 == batches;
        if !last && planner.promising_set.len() > before {
            planner.replan(ReplanScope::Promising)?;
        }
    }
    planner.replan(ReplanScope::CompleteGraph)?;
    // one-way edge flow: everything staged has been consumed exactly once
    debug_assert_eq!(planner.staging.pending(&planner.edges), 0);
    debug_assert_eq!(planner.csr.n_edges(), planner.edges.len());
    planner.finish(t_start.elapsed())
}
