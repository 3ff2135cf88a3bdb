//! Shared oracles for integration tests. These stay independent of the
//! planner's own exploitation path: plain binary-heap Dijkstra over the
//! staged edge list.
//!
//! Compiled into several test targets; not every target uses every helper.
#![allow(dead_code)]

use berrt::{Bounds, EdgeBatch, Polygon, State, World};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Dijkstra distances from `source` over the full staged edge set, using the
/// cached edge costs exactly as staged.
pub fn dijkstra(edges: &EdgeBatch, n_vertices: usize, source: u32) -> Vec<f64> {
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_vertices];
    for i in 0..edges.len() {
        let (s, d, c) = edges.triple(i);
        adj[s as usize].push((d, c));
    }
    let mut dist = vec![f64::INFINITY; n_vertices];
    dist[source as usize] = 0.0;
    let mut heap: BinaryHeap<(Reverse<u64>, u32)> = BinaryHeap::new();
    heap.push((Reverse(0.0f64.to_bits()), source));
    while let Some((Reverse(dbits), v)) = heap.pop() {
        let d = f64::from_bits(dbits);
        if d > dist[v as usize] {
            continue;
        }
        for &(n, c) in &adj[v as usize] {
            let nd = d + c;
            if nd < dist[n as usize] {
                dist[n as usize] = nd;
                // nonnegative finite floats order correctly by their bits
                heap.push((Reverse(nd.to_bits()), n));
            }
        }
    }
    dist
}

pub fn unit_bounds() -> Bounds {
    Bounds {
        xmin: 0.0,
        ymin: 0.0,
        xmax: 1.0,
        ymax: 1.0,
    }
}

/// Axis-aligned rectangular obstacle.
pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    Polygon::new(vec![
        State::new(x0, y0),
        State::new(x1, y0),
        State::new(x1, y1),
        State::new(x0, y1),
    ])
}

/// Random world with a few boxes that never cover the fixed init/goal
/// corners.
pub fn random_world(rng: &mut ChaCha8Rng) -> World {
    let mut obstacles = Vec::new();
    let k = rng.random_range(0..6);
    for _ in 0..k {
        let x0: f64 = rng.random_range(0.15..0.75);
        let y0: f64 = rng.random_range(0.15..0.75);
        let w: f64 = rng.random_range(0.05..0.2);
        let h: f64 = rng.random_range(0.05..0.2);
        obstacles.push(rect(x0, y0, (x0 + w).min(0.88), (y0 + h).min(0.88)));
    }
    World {
        bounds: unit_bounds(),
        obstacles,
        x_init: State::new(0.05, 0.05),
        x_goal: State::new(0.95, 0.95),
    }
}

/// Path to a bundled scenario file.
pub fn scenario_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}
