//! Shared fixtures for the exploitation benchmarks: random geometric graphs
//! with a consistent warm-start policy, shaped like mid-run planner state.

use berrt::{cost, rebuild_csr, CsrGraph, EdgeBatch, State, VertexStore};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct ExploitFixture {
    pub csr: CsrGraph,
    pub vertices: VertexStore,
    pub edges: EdgeBatch,
    /// Every non-root, non-goal vertex; a worst-case promising set.
    pub work: Vec<u32>,
}

/// Random geometric graph over the unit square with `n` vertices, about
/// `degree` undirected edges per vertex, and tree-consistent costs-to-come.
pub fn build_fixture(n: usize, degree: usize, seed: u64) -> ExploitFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vs = VertexStore::new();
    let goal_state = State::new(0.95, 0.95);
    let init_state = State::new(0.05, 0.05);
    vs.add_vertex(init_state, 0.0, cost(init_state, goal_state), None);
    vs.add_vertex(goal_state, f64::INFINITY, 0.0, None);
    for _ in 2..n {
        let s = State::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        vs.add_vertex(s, f64::INFINITY, cost(s, goal_state), None);
    }

    let mut edges = EdgeBatch::new();
    let mut seen = std::collections::HashSet::new();
    for v in 1..n as u32 {
        for _ in 0..degree {
            let u = rng.random_range(0..v);
            if seen.insert((u, v)) {
                let c = cost(vs.states[u as usize], vs.states[v as usize]);
                edges.push(u, v, c).unwrap();
                edges.push(v, u, c).unwrap();
            }
        }
    }
    let csr = rebuild_csr(&CsrGraph::empty(n), &edges.src, &edges.dst, &edges.cost, n).unwrap();

    // warm-start policy: lowest-id neighbor, costs as tree sums
    for v in 2..n as u32 {
        let (dst, costs) = csr.out_edges(v);
        if let Some(i) = (0..dst.len()).find(|&i| dst[i] < v) {
            vs.set_parent(v, Some(dst[i]));
            vs.g[v as usize] = vs.g[dst[i] as usize] + costs[i];
        }
    }
    let work: Vec<u32> = (2..n as u32).collect();
    for &v in &work {
        vs.promising[v as usize] = true;
    }
    ExploitFixture {
        csr,
        vertices: vs,
        edges,
        work,
    }
}
