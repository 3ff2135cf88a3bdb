//! Host-side data-parallel exploitation backend.
//!
//! Mirrors the device-offload data flow while staying on the host: vertex
//! properties are shared as flat buffers, staged edges are consumed exactly
//! once per replan by an amortized CSR rebuild, policy improvement assigns
//! one worker per promising vertex, and policy evaluation processes whole
//! tree frontiers per level without open or closed sets.
//!
//! Results are bit-identical to the serial backend for any worker count:
//! improvement writes are disjoint per worked vertex, evaluation writes are
//! disjoint because every tree edge leads to a unique child, per-chunk
//! outputs are concatenated in chunk order, and the improvement bound is a
//! max-reduction, which is exact for floats.

use rayon::prelude::*;
use rayon::ThreadPoolBuilder;

use crate::error::{GraphError, PlannerError};
use crate::graph::{rebuild_csr, CsrGraph, EdgeBatch, VertexId, VertexStore};
use crate::planner::{is_promising, GOAL_ID, INIT_ID};

/// Fixed-size thread pool executing the parallel kernels.
pub struct WorkerPool {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl WorkerPool {
    /// Build a pool with `workers` threads; 0 selects the available hardware
    /// parallelism.
    pub fn new(workers: usize) -> Result<Self, PlannerError> {
        let workers = if workers == 0 {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        } else {
            workers
        };
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| PlannerError::WorkerPool {
                reason: e.to_string(),
            })?;
        Ok(WorkerPool { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

/// Double-buffered frontier for level-synchronous tree traversal. Every tree
/// edge leads to a unique vertex, so a frontier never holds duplicates.
#[derive(Debug, Default)]
pub struct Frontier {
    pub current: Vec<VertexId>,
    pub next: Vec<VertexId>,
}

impl Frontier {
    pub fn new(root: VertexId) -> Self {
        Frontier {
            current: vec![root],
            next: Vec::new(),
        }
    }

    pub fn swap(&mut self) {
        std::mem::swap(&mut self.current, &mut self.next);
    }
}

/// Watermark over the shared edge batch marking the segment already merged
/// into the CSR. Edges move producer -> consumer exactly once.
#[derive(Debug, Default)]
pub struct StagingBuffer {
    watermark: usize,
}

impl StagingBuffer {
    pub fn new() -> Self {
        StagingBuffer { watermark: 0 }
    }

    /// Directed edges staged since the last rebuild.
    pub fn pending(&self, edges: &EdgeBatch) -> usize {
        edges.len() - self.watermark
    }

    pub fn watermark(&self) -> usize {
        self.watermark
    }

    /// Consume the staged segment into a fresh CSR and advance the watermark.
    /// Call exactly once at the start of each replan.
    pub fn sync_and_rebuild(
        &mut self,
        edges: &EdgeBatch,
        old: &CsrGraph,
        n_vertices: usize,
    ) -> Result<CsrGraph, GraphError> {
        let end = edges.len();
        if end < self.watermark {
            return Err(GraphError::WatermarkRegression {
                current: self.watermark,
                requested: end,
            });
        }
        let csr = rebuild_csr(
            old,
            &edges.src[self.watermark..end],
            &edges.dst[self.watermark..end],
            &edges.cost[self.watermark..end],
            n_vertices,
        )?;
        self.watermark = end;
        Ok(csr)
    }
}

/// Raw shared view of a property array for disjoint cross-worker writes.
/// Callers must guarantee no two workers touch the same element within a
/// synchronization phase.
struct SharedSlice<T> {
    ptr: *mut T,
}

unsafe impl<T: Send> Send for SharedSlice<T> {}
unsafe impl<T: Send> Sync for SharedSlice<T> {}

impl<T: Copy> SharedSlice<T> {
    fn new(slice: &mut [T]) -> Self {
        SharedSlice {
            ptr: slice.as_mut_ptr(),
        }
    }

    #[inline]
    unsafe fn get(&self, i: usize) -> T {
        *self.ptr.add(i)
    }

    #[inline]
    unsafe fn set(&self, i: usize, v: T) {
        *self.ptr.add(i) = v;
    }
}

fn chunk_size(len: usize, workers: usize) -> usize {
    (len / (workers * 4).max(1)).max(32)
}

/// Parallel policy improvement: one worker per worked vertex, scanning its
/// outgoing edges for the cheapest parent. Identical output to the serial
/// sweep; the improvement bound is the max-reduction of per-chunk maxima.
pub fn improve_parallel(
    pool: &WorkerPool,
    csr: &CsrGraph,
    vs: &mut VertexStore,
    work: &[VertexId],
) -> f64 {
    if work.is_empty() {
        return 0.0;
    }
    let (g, parent) = vs.improve_view();
    let parent_w = SharedSlice::new(parent);
    let chunk = chunk_size(work.len(), pool.workers);
    pool.pool.install(|| {
        work.par_chunks(chunk)
            .map(|ids| {
                let mut local = 0.0f64;
                for &v in ids {
                    let g_v = g[v as usize];
                    let mut best = g_v;
                    let mut best_parent = u32::MAX;
                    let (dst, costs) = csr.out_edges(v);
                    for i in 0..dst.len() {
                        let via = g[dst[i] as usize] + costs[i];
                        if via < best {
                            best = via;
                            best_parent = dst[i];
                        }
                    }
                    if best_parent != u32::MAX {
                        // sole writer for v within this sweep
                        unsafe { parent_w.set(v as usize, best_parent) };
                        let improvement = g_v - best;
                        if improvement > local {
                            local = improvement;
                        }
                    }
                }
                local
            })
            .reduce(|| 0.0, f64::max)
    })
}

/// Parallel policy evaluation: level-synchronous walk of the policy tree,
/// each frontier chunk relaxing its vertices' tree children. The goal cost
/// feeding the promising test is snapshotted once per level, exactly like
/// the serial walk, so outputs match bit for bit.
pub fn evaluate_parallel(
    pool: &WorkerPool,
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

    let n = vs.len();
    let (g, h, parent, promising) = vs.evaluate_view();
    let g_w = SharedSlice::new(g);
    let prom_w = SharedSlice::new(promising);
    let mut visited = if validate { vec![false; n] } else { Vec::new() };

    let mut frontier = Frontier::new(INIT_ID);
    while !frontier.current.is_empty() {
        let g_goal = unsafe { g_w.get(GOAL_ID as usize) };
        let chunk = chunk_size(frontier.current.len(), pool.workers);
        let results: Vec<(Vec<VertexId>, Vec<VertexId>)> = pool.pool.install(|| {
            frontier
                .current
                .par_chunks(chunk)
                .map(|ids| {
                    let mut next = Vec::new();
                    let mut newly_promising = Vec::new();
                    for &v in ids {
                        let g_v = unsafe { g_w.get(v as usize) };
                        let (dst, costs) = csr.out_edges(v);
                        for i in 0..dst.len() {
                            let child = dst[i];
                            if parent[child as usize] != v {
                                continue;
                            }
                            let g_c = g_v + costs[i];
                            // the child's sole in-tree edge is (v, child)
                            unsafe { g_w.set(child as usize, g_c) };
                            let pass = if cfg!(feature = "parent-gate") {
                                h[v as usize] + g_v < g_goal
                            } else {
                                is_promising(g_c, h[child as usize], g_goal)
                            };
                            // goal never joins the promising set; the ungated
                            // walk still expands it (beyond-goal consistency)
                            if pass && child != GOAL_ID {
                                unsafe { prom_w.set(child as usize, true) };
                                newly_promising.push(child);
                                next.push(child);
                            } else if !gated {
                                next.push(child);
                            }
                        }
                    }
                    (next, newly_promising)
                })
                .collect()
        });
        frontier.next.clear();
        for (next, newly_promising) in results {
            if validate {
                for &v in &next {
                    if visited[v as usize] {
                        return Err(GraphError::ParentCycle { vertex: v });
                    }
                    visited[v as usize] = true;
                }
            }
            frontier.next.extend_from_slice(&next);
            promising_set.extend_from_slice(&newly_promising);
        }
        frontier.swap();
    }
    Ok(())
}
