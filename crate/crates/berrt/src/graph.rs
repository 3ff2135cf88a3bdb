//! Vertex and edge storage for the planner.
//!
//! Vertex properties live in structure-of-arrays form so exploitation kernels
//! touch contiguous buffers. Edges are produced append-only into a coordinate
//! list (the staging format) and consumed by a compressed-sparse-row rebuild
//! once per replan: new triples are radix-sorted on the packed (src, dst) key
//! and merged row-wise with the previous CSR.

use std::collections::HashSet;
use std::io::Write;

use crate::error::GraphError;
use crate::world::State;

pub type VertexId = u32;

/// Sentinel for "no parent" in the structure-of-arrays parent column.
pub const NO_PARENT: u32 = u32::MAX;

/// Per-vertex planner state in structure-of-arrays layout: position,
/// cost-to-come, heuristic cost-to-go, policy parent and promising flag.
#[derive(Debug, Clone, Default)]
pub struct VertexStore {
    pub states: Vec<State>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    parent: Vec<u32>,
    pub promising: Vec<bool>,
}

impl VertexStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Append a vertex; the new id is the previous vertex count.
    pub fn add_vertex(&mut self, s: State, g: f64, h: f64, parent: Option<VertexId>) -> VertexId {
        let id = self.states.len() as VertexId;
        self.states.push(s);
        self.g.push(g);
        self.h.push(h);
        self.parent.push(parent.unwrap_or(NO_PARENT));
        self.promising.push(false);
        id
    }

    #[inline]
    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        let p = self.parent[v as usize];
        (p != NO_PARENT).then_some(p)
    }

    #[inline]
    pub fn set_parent(&mut self, v: VertexId, p: Option<VertexId>) {
        self.parent[v as usize] = p.unwrap_or(NO_PARENT);
    }

    /// Raw parent column (NO_PARENT sentinel encoding), for the parallel
    /// kernels and snapshotting.
    #[inline]
    pub fn parent_raw(&self) -> &[u32] {
        &self.parent
    }

    /// Split borrow for the improvement kernel: costs-to-come read-only,
    /// parents writable.
    pub(crate) fn improve_view(&mut self) -> (&[f64], &mut [u32]) {
        (&self.g, &mut self.parent)
    }

    /// Split borrow for the evaluation kernel: costs-to-come and promising
    /// flags writable, heuristic and parents read-only.
    pub(crate) fn evaluate_view(&mut self) -> (&mut [f64], &[f64], &[u32], &mut [bool]) {
        (&mut self.g, &self.h, &self.parent, &mut self.promising)
    }

    /// Walk parent pointers from `v` to the root. Errors if a cycle makes the
    /// chain longer than the vertex count.
    pub fn ancestry(&self, v: VertexId) -> Result<Vec<VertexId>, GraphError> {
        let mut chain = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            chain.push(p);
            if chain.len() > self.len() {
                return Err(GraphError::ParentCycle { vertex: v });
            }
            cur = p;
        }
        Ok(chain)
    }
}

/// Append-only coordinate list of directed edges with cached traversal costs.
/// This is the staging/transfer format between exploration and exploitation.
#[derive(Debug, Clone, Default)]
pub struct EdgeBatch {
    pub src: Vec<u32>,
    pub dst: Vec<u32>,
    pub cost: Vec<f64>,
    seen: Option<HashSet<(u32, u32)>>,
}

impl EdgeBatch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Enable duplicate-pair detection (validation mode). Costs a hash probe
    /// per append, so benchmark runs leave it off.
    pub fn with_validation() -> Self {
        EdgeBatch {
            seen: Some(HashSet::new()),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    pub fn push(&mut self, src: u32, dst: u32, cost: f64) -> Result<(), GraphError> {
        if let Some(seen) = &mut self.seen {
            if !seen.insert((src, dst)) {
                return Err(GraphError::DuplicateEdge { src, dst });
            }
        }
        self.src.push(src);
        self.dst.push(dst);
        self.cost.push(cost);
        Ok(())
    }

    pub fn append_edges(&mut self, triples: &[(u32, u32, f64)]) -> Result<(), GraphError> {
        for &(s, d, c) in triples {
            self.push(s, d, c)?;
        }
        Ok(())
    }

    pub fn triple(&self, i: usize) -> (u32, u32, f64) {
        (self.src[i], self.dst[i], self.cost[i])
    }

    /// Text edge-list dump (`src dst cost` per line) for oracle cross-checks.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.len() {
            writeln!(w, "{} {} {}", self.src[i], self.dst[i], self.cost[i])?;
        }
        Ok(())
    }
}

/// Compressed-sparse-row adjacency with per-edge costs. Immutable between
/// rebuilds and read-shared by all exploitation workers.
#[derive(Debug, Clone, Default)]
pub struct CsrGraph {
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<u32>,
    pub edge_costs: Vec<f64>,
}

impl CsrGraph {
    pub fn empty(n_vertices: usize) -> Self {
        CsrGraph {
            row_offsets: vec![0; n_vertices + 1],
            col_indices: Vec::new(),
            edge_costs: Vec::new(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.row_offsets.len().saturating_sub(1)
    }

    pub fn n_edges(&self) -> usize {
        self.col_indices.len()
    }

    /// Outgoing edges of `v` as parallel (dst, cost) slices. Constant-time
    /// addressing into the contiguous row.
    #[inline]
    pub fn out_edges(&self, v: VertexId) -> (&[u32], &[f64]) {
        let lo = self.row_offsets[v as usize];
        let hi = self.row_offsets[v as usize + 1];
        (&self.col_indices[lo..hi], &self.edge_costs[lo..hi])
    }
}

/// Verify that parent pointers form a forest (no cycles), in O(|V|) via
/// three-color chain walking. Validation-mode check; cycles are impossible
/// by construction because rewires require strict improvement.
pub fn check_policy_forest(vs: &VertexStore) -> Result<(), GraphError> {
    // 0 = unseen, 1 = on the current chain, 2 = verified
    let mut color = vec![0u8; vs.len()];
    let mut chain = Vec::new();
    for v in 0..vs.len() as u32 {
        if color[v as usize] != 0 {
            continue;
        }
        let mut cur = v;
        loop {
            color[cur as usize] = 1;
            chain.push(cur);
            match vs.parent(cur) {
                Some(p) => match color[p as usize] {
                    0 => cur = p,
                    1 => return Err(GraphError::ParentCycle { vertex: p }),
                    _ => break,
                },
                None => break,
            }
        }
        for &u in &chain {
            color[u as usize] = 2;
        }
        chain.clear();
    }
    Ok(())
}

/// Radix-sort the staged triples by the packed (src, dst) key, least
/// significant digit first, 16 bits per pass. Passes whose digits are zero
/// for every key are skipped, so the cost stays linear in practice.
fn radix_sort_edges(keys: &mut Vec<(u64, f64)>) {
    if keys.len() <= 1 {
        return;
    }
    // digit passes only pay off in bulk; tiny staged segments (replans after
    // a single extension) sort directly on the unique keys
    if keys.len() < 2048 {
        keys.sort_unstable_by_key(|&(k, _)| k);
        return;
    }
    let max_key = keys.iter().map(|&(k, _)| k).max().unwrap_or(0);
    let mut scratch: Vec<(u64, f64)> = vec![(0, 0.0); keys.len()];
    let mut counts = vec![0usize; 1 << 16];
    for pass in 0..4 {
        let shift = pass * 16;
        if (max_key >> shift) == 0 {
            break;
        }
        counts.fill(0);
        for &(k, _) in keys.iter() {
            counts[((k >> shift) & 0xFFFF) as usize] += 1;
        }
        let mut sum = 0usize;
        for c in counts.iter_mut() {
            let cur = *c;
            *c = sum;
            sum += cur;
        }
        for &(k, v) in keys.iter() {
            let digit = ((k >> shift) & 0xFFFF) as usize;
            scratch[counts[digit]] = (k, v);
            counts[digit] += 1;
        }
        std::mem::swap(keys, &mut scratch);
    }
}

/// Merge the previous CSR with a freshly staged edge segment into a new CSR
/// over `n_vertices` rows. The old graph is not mutated; each staged segment
/// must be consumed by exactly one rebuild.
pub fn rebuild_csr(
    old: &CsrGraph,
    staged_src: &[u32],
    staged_dst: &[u32],
    staged_cost: &[f64],
    n_vertices: usize,
) -> Result<CsrGraph, GraphError> {
    debug_assert_eq!(staged_src.len(), staged_dst.len());
    debug_assert_eq!(staged_src.len(), staged_cost.len());
    for i in 0..staged_src.len() {
        if staged_src[i] as usize >= n_vertices || staged_dst[i] as usize >= n_vertices {
            return Err(GraphError::VertexOutOfRange {
                src: staged_src[i],
                dst: staged_dst[i],
                n_vertices,
            });
        }
    }

    let mut keyed: Vec<(u64, f64)> = (0..staged_src.len())
        .map(|i| {
            (
                ((staged_src[i] as u64) << 32) | staged_dst[i] as u64,
                staged_cost[i],
            )
        })
        .collect();
    radix_sort_edges(&mut keyed);

    let total = old.n_edges() + keyed.len();
    let mut row_offsets = Vec::with_capacity(n_vertices + 1);
    let mut col_indices = Vec::with_capacity(total);
    let mut edge_costs = Vec::with_capacity(total);

    let old_rows = old.n_vertices();
    let mut staged_pos = 0usize;
    row_offsets.push(0);
    for v in 0..n_vertices {
        let (old_dst, old_cost) = if v < old_rows {
            old.out_edges(v as u32)
        } else {
            (&[][..], &[][..])
        };
        let staged_end = {
            let mut e = staged_pos;
            while e < keyed.len() && (keyed[e].0 >> 32) == v as u64 {
                e += 1;
            }
            e
        };
        // two-pointer merge of the sorted old row and the sorted staged run
        let (mut i, mut j) = (0usize, staged_pos);
        while i < old_dst.len() && j < staged_end {
            let new_dst = (keyed[j].0 & 0xFFFF_FFFF) as u32;
            if old_dst[i] <= new_dst {
                col_indices.push(old_dst[i]);
                edge_costs.push(old_cost[i]);
                i += 1;
            } else {
                col_indices.push(new_dst);
                edge_costs.push(keyed[j].1);
                j += 1;
            }
        }
        while i < old_dst.len() {
            col_indices.push(old_dst[i]);
            edge_costs.push(old_cost[i]);
            i += 1;
        }
        while j < staged_end {
            col_indices.push((keyed[j].0 & 0xFFFF_FFFF) as u32);
            edge_costs.push(keyed[j].1);
            j += 1;
        }
        staged_pos = staged_end;
        row_offsets.push(col_indices.len());
    }

    Ok(CsrGraph {
        row_offsets,
        col_indices,
        edge_costs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn add_vertex_assigns_dense_ids() {
        let mut vs = VertexStore::new();
        let init = vs.add_vertex(State::new(0.0, 0.0), 0.0, 1.0, None);
        assert_eq!(init, 0);
        assert_eq!(vs.g[0], 0.0);
        assert_eq!(vs.parent(0), None);
        let goal = vs.add_vertex(State::new(1.0, 1.0), f64::INFINITY, 0.0, None);
        assert_eq!(goal, 1);
        assert!(!vs.promising[1]);
        assert!(vs.g[1].is_infinite());
    }

    #[test]
    fn add_vertex_keeps_arrays_coherent() {
        let mut vs = VertexStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..1000u32 {
            let parent = if i == 0 {
                None
            } else {
                Some(rng.random_range(0..i))
            };
            let id = vs.add_vertex(
                State::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)),
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
                parent,
            );
            assert_eq!(id, i);
        }
        assert_eq!(vs.len(), 1000);
        assert_eq!(vs.g.len(), 1000);
        assert_eq!(vs.h.len(), 1000);
        assert_eq!(vs.parent_raw().len(), 1000);
        assert_eq!(vs.promising.len(), 1000);
        // parents always point at earlier ids here, so every chain terminates
        for v in 0..1000 {
            vs.ancestry(v).unwrap();
        }
    }

    #[test]
    fn ancestry_detects_cycles() {
        let mut vs = VertexStore::new();
        vs.add_vertex(State::new(0.0, 0.0), 0.0, 0.0, None);
        vs.add_vertex(State::new(1.0, 0.0), 1.0, 0.0, Some(2));
        vs.add_vertex(State::new(2.0, 0.0), 2.0, 0.0, Some(1));
        assert!(matches!(
            vs.ancestry(1),
            Err(GraphError::ParentCycle { .. })
        ));
    }

    #[test]
    fn append_preserves_order_and_contents() {
        let mut batch = EdgeBatch::new();
        batch.append_edges(&[(0, 1, 5.0)]).unwrap();
        assert_eq!(batch.len(), 1);
        batch.append_edges(&[(0, 2, 6.0), (1, 2, 7.0)]).unwrap();
        assert_eq!(batch.triple(0), (0, 1, 5.0));
        assert_eq!(batch.triple(1), (0, 2, 6.0));
        assert_eq!(batch.triple(2), (1, 2, 7.0));
    }

    #[test]
    fn append_many_equals_concatenation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut batch = EdgeBatch::new();
        let mut reference = Vec::new();
        for _ in 0..100_000 {
            let t = (
                rng.random_range(0..500u32),
                rng.random_range(0..500u32),
                rng.random_range(0.0..1.0),
            );
            batch.push(t.0, t.1, t.2).unwrap();
            reference.push(t);
        }
        assert_eq!(batch.len(), reference.len());
        for (i, &t) in reference.iter().enumerate() {
            assert_eq!(batch.triple(i), t);
        }
    }

    #[test]
    fn duplicate_edges_rejected_in_validation_mode() {
        let mut batch = EdgeBatch::with_validation();
        batch.push(3, 4, 1.0).unwrap();
        assert!(matches!(
            batch.push(3, 4, 1.0),
            Err(GraphError::DuplicateEdge { src: 3, dst: 4 })
        ));
        // reverse direction is a distinct pair
        batch.push(4, 3, 1.0).unwrap();
    }

    #[test]
    fn rebuild_from_empty_matches_hand_construction() {
        let old = CsrGraph::empty(0);
        let csr = rebuild_csr(&old, &[0, 0, 1], &[1, 2, 2], &[5.0, 6.0, 7.0], 3).unwrap();
        assert_eq!(csr.row_offsets, vec![0, 2, 3, 3]);
        let (dst, cost) = csr.out_edges(0);
        assert_eq!(dst, &[1, 2]);
        assert_eq!(cost, &[5.0, 6.0]);
        let (dst, _) = csr.out_edges(2);
        assert!(dst.is_empty());
    }

    #[test]
    fn rebuild_with_empty_segment_is_identity() {
        let old = rebuild_csr(
            &CsrGraph::empty(3),
            &[0, 0, 1],
            &[1, 2, 2],
            &[5.0, 6.0, 7.0],
            3,
        )
        .unwrap();
        let merged = rebuild_csr(&old, &[], &[], &[], 3).unwrap();
        assert_eq!(merged.row_offsets, old.row_offsets);
        assert_eq!(merged.col_indices, old.col_indices);
        assert_eq!(merged.edge_costs, old.edge_costs);
    }

    #[test]
    fn rebuild_rejects_out_of_range_vertices() {
        let old = CsrGraph::empty(2);
        assert!(matches!(
            rebuild_csr(&old, &[0], &[5], &[1.0], 2),
            Err(GraphError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn out_edge_row_lengths_match_offsets() {
        let csr = rebuild_csr(
            &CsrGraph::empty(4),
            &[2, 0, 3, 0],
            &[1, 3, 0, 1],
            &[1.0, 2.0, 3.0, 4.0],
            4,
        )
        .unwrap();
        for v in 0..4u32 {
            let (dst, _) = csr.out_edges(v);
            assert_eq!(
                dst.len(),
                csr.row_offsets[v as usize + 1] - csr.row_offsets[v as usize]
            );
        }
    }

    /// Reference adjacency list built directly from all triples.
    fn adjacency_reference(triples: &[(u32, u32, f64)], n: usize) -> Vec<Vec<(u32, f64)>> {
        let mut adj = vec![Vec::new(); n];
        for &(s, d, c) in triples {
            adj[s as usize].push((d, c));
        }
        for row in &mut adj {
            row.sort_by_key(|&(d, _)| d);
        }
        adj
    }

    #[test]
    fn incremental_rebuilds_match_adjacency_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = rng.random_range(1..60usize);
            let mut all: Vec<(u32, u32, f64)> = Vec::new();
            let mut seen = HashSet::new();
            let mut csr = CsrGraph::empty(n);
            // several staged segments consumed by successive rebuilds
            for _ in 0..rng.random_range(1..5usize) {
                let mut src = Vec::new();
                let mut dst = Vec::new();
                let mut cost = Vec::new();
                for _ in 0..rng.random_range(0..40usize) {
                    let s = rng.random_range(0..n as u32);
                    let d = rng.random_range(0..n as u32);
                    if !seen.insert((s, d)) {
                        continue; // one edge per ordered pair across the run
                    }
                    let c = rng.random_range(0.0..10.0);
                    src.push(s);
                    dst.push(d);
                    cost.push(c);
                    all.push((s, d, c));
                }
                csr = rebuild_csr(&csr, &src, &dst, &cost, n).unwrap();
            }
            let adj = adjacency_reference(&all, n);
            assert_eq!(csr.n_edges(), all.len());
            for v in 0..n as u32 {
                let (dst, cost) = csr.out_edges(v);
                let got: Vec<(u32, f64)> = dst.iter().copied().zip(cost.iter().copied()).collect();
                assert_eq!(got, adj[v as usize], "row {v}");
                // strictly increasing columns within the row
                for w in dst.windows(2) {
                    assert!(w[0] < w[1]);
                }
            }
        }
    }

    #[test]
    fn edge_list_dump_round_trips() {
        let mut batch = EdgeBatch::new();
        batch
            .append_edges(&[(0, 1, 5.0), (1, 0, 5.0), (0, 2, 6.25)])
            .unwrap();
        let mut buf = Vec::new();
        batch.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<(u32, u32, f64)> = text
            .lines()
            .map(|l| {
                let mut it = l.split_whitespace();
                (
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect();
        assert_eq!(parsed, vec![(0, 1, 5.0), (1, 0, 5.0), (0, 2, 6.25)]);
    }
}
