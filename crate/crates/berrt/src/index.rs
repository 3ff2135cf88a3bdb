//! Grid-bucket spatial index over vertex states.
//!
//! Supports nearest-vertex and fixed-radius queries with results identical
//! (as sets, and with lowest-id tie-breaking) to a brute-force linear scan.
//! Inserts happen only during single-threaded exploration; queries may be
//! issued concurrently from read-only shares.

use crate::error::WorldError;
use crate::graph::VertexId;
use crate::world::{cost, Bounds, State};

const GRID_DIM: usize = 64;

/// Uniform grid over the world bounds bucketing vertex ids by cell.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    bounds: Bounds,
    cell_w: f64,
    cell_h: f64,
    buckets: Vec<Vec<VertexId>>,
    states: Vec<State>,
}

impl SpatialIndex {
    pub fn new(bounds: Bounds) -> Self {
        SpatialIndex {
            bounds,
            cell_w: bounds.width() / GRID_DIM as f64,
            cell_h: bounds.height() / GRID_DIM as f64,
            buckets: vec![Vec::new(); GRID_DIM * GRID_DIM],
            states: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn cell_of(&self, s: State) -> (usize, usize) {
        let cx = ((s.x - self.bounds.xmin) / self.cell_w) as usize;
        let cy = ((s.y - self.bounds.ymin) / self.cell_h) as usize;
        (cx.min(GRID_DIM - 1), cy.min(GRID_DIM - 1))
    }

    /// Insert the state for the next vertex id. Ids are assigned densely in
    /// insertion order and must match the planner's vertex store.
    pub fn insert(&mut self, s: State) -> VertexId {
        let id = self.states.len() as VertexId;
        self.states.push(s);
        let (cx, cy) = self.cell_of(s);
        self.buckets[cy * GRID_DIM + cx].push(id);
        id
    }

    /// Nearest stored vertex to `q` by Euclidean distance, ties broken by the
    /// lowest vertex id. Errors on an empty index.
    pub fn nearest(&self, q: State) -> Result<VertexId, WorldError> {
        if self.states.is_empty() {
            return Err(WorldError::EmptyIndex);
        }
        let (qx, qy) = self.cell_of(q);
        let min_cell = self.cell_w.min(self.cell_h);
        let mut best_d = f64::INFINITY;
        let mut best_id: VertexId = 0;
        let mut found = false;
        for ring in 0..GRID_DIM {
            // cells at Chebyshev distance `ring` from the query cell
            let x0 = qx.saturating_sub(ring);
            let x1 = (qx + ring).min(GRID_DIM - 1);
            let y0 = qy.saturating_sub(ring);
            let y1 = (qy + ring).min(GRID_DIM - 1);
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    let on_ring = cx == x0 || cx == x1 || cy == y0 || cy == y1;
                    if ring > 0 && !on_ring {
                        continue;
                    }
                    for &id in &self.buckets[cy * GRID_DIM + cx] {
                        let d = cost(q, self.states[id as usize]);
                        if !found || d < best_d || (d == best_d && id < best_id) {
                            best_d = d;
                            best_id = id;
                            found = true;
                        }
                    }
                }
            }
            // ring k+1 cells lie at distance >= k * min_cell from q, so once
            // that floor strictly exceeds best_d no farther ring can win a
            // distance tie either
            if found && ring as f64 * min_cell > best_d {
                break;
            }
            if x0 == 0 && y0 == 0 && x1 == GRID_DIM - 1 && y1 == GRID_DIM - 1 {
                break;
            }
        }
        Ok(best_id)
    }

    /// All vertex ids within Euclidean distance `r` of `q` (inclusive),
    /// sorted ascending by id.
    pub fn near(&self, q: State, r: f64) -> Vec<VertexId> {
        let x0 = self.cell_clamp((q.x - r - self.bounds.xmin) / self.cell_w);
        let x1 = self.cell_clamp((q.x + r - self.bounds.xmin) / self.cell_w);
        let y0 = self.cell_clamp((q.y - r - self.bounds.ymin) / self.cell_h);
        let y1 = self.cell_clamp((q.y + r - self.bounds.ymin) / self.cell_h);
        let mut out = Vec::new();
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for &id in &self.buckets[cy * GRID_DIM + cx] {
                    if cost(q, self.states[id as usize]) <= r {
                        out.push(id);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn cell_clamp(&self, c: f64) -> usize {
        if c < 0.0 {
            0
        } else {
            (c as usize).min(GRID_DIM - 1)
        }
    }

    pub fn state(&self, id: VertexId) -> State {
        self.states[id as usize]
    }
}
