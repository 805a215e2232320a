#![allow(dead_code)]

use lapcompress::graph::{consensus_matrix, Edge, NetworkGraph};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected undirected graph: a random spanning tree plus extra edges,
/// symmetric random weights scaled so the largest in-sum is `max_in`.
pub fn random_symmetric(n: usize, extra: f64, max_in: f64, seed: u64) -> NetworkGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let j = rng.random_range(0..i);
        let x = rng.random_range(0.2..1.0);
        w[(i, j)] = x;
        w[(j, i)] = x;
    }
    for i in 0..n {
        for j in 0..i {
            if w[(i, j)] == 0.0 && rng.random_bool(extra) {
                let x = rng.random_range(0.2..1.0);
                w[(i, j)] = x;
                w[(j, i)] = x;
            }
        }
    }
    let top = (0..n).map(|i| w.row(i).sum()).fold(0.0, f64::max);
    let scale = if top > 0.0 { max_in / top } else { 1.0 };
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if w[(i, j)] > 0.0 {
                edges.push(Edge::new(j, i, w[(i, j)] * scale));
            }
        }
    }
    NetworkGraph::new(n, edges).unwrap()
}

/// Strongly connected digraph: a directed ring plus random arcs with
/// distinct random weights, in-sums scaled to at most `max_in`.
pub fn random_directed(n: usize, extra: f64, max_in: f64, seed: u64) -> NetworkGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        w[((i + 1) % n, i)] = rng.random_range(0.2..1.0);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && w[(i, j)] == 0.0 && rng.random_bool(extra) {
                w[(i, j)] = rng.random_range(0.2..1.0);
            }
        }
    }
    let top = (0..n).map(|i| w.row(i).sum()).fold(0.0, f64::max);
    let scale = max_in / top;
    let mut edges = Vec::new();
    for dst in 0..n {
        for src in 0..n {
            if w[(dst, src)] > 0.0 {
                edges.push(Edge::new(src, dst, w[(dst, src)] * scale));
            }
        }
    }
    NetworkGraph::new(n, edges).unwrap()
}

/// Path graph with every edge weight `w` in both directions.
pub fn weighted_path(n: usize, w: f64) -> NetworkGraph {
    let edges = (0..n - 1)
        .flat_map(|i| [Edge::new(i, i + 1, w), Edge::new(i + 1, i, w)])
        .collect();
    NetworkGraph::new(n, edges).unwrap()
}

pub fn a_of(g: &NetworkGraph) -> DMatrix<f64> {
    consensus_matrix(g).unwrap()
}
