//! Weighted digraphs, their Laplacians, and the random geometric generator.
//!
//! An edge `src -> dst` with weight `w` means node `src` directly influences
//! node `dst`. The Laplacian puts `-w` at row `dst`, column `src`, and the
//! diagonal makes every row sum to zero, so row `i` of the Laplacian carries
//! the incoming weights of node `i`.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placement budget for [`random_geometric_graph`].
pub const DEFAULT_MAX_ATTEMPTS: usize = 50;

/// Radius that gives a mean degree of roughly 10 for 200 nodes in the unit
/// square.
pub const DEFAULT_RADIUS: f64 = 0.135;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: usize, dst: usize, weight: f64) -> Self {
        Edge { src, dst, weight }
    }
}

/// Weighted digraph over `n` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    n: usize,
    edges: Vec<Edge>,
    labels: Option<Vec<String>>,
}

impl NetworkGraph {
    /// Validates and builds a graph. Edges are kept in the given order.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            let bad = |reason: &str| Error::InvalidEdge {
                src: e.src,
                dst: e.dst,
                reason: reason.to_string(),
            };
            if e.src >= n || e.dst >= n {
                return Err(bad(&format!("node index out of range 0..{n}")));
            }
            if e.src == e.dst {
                return Err(bad("self-loop"));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(bad(&format!("weight {} is not strictly positive", e.weight)));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(bad("duplicate edge"));
            }
        }
        Ok(NetworkGraph {
            n,
            edges,
            labels: None,
        })
    }

    /// Graph with unit-weight edges in both directions for every listed pair.
    pub fn undirected(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges = pairs
            .iter()
            .flat_map(|&(a, b)| [Edge::new(a, b, 1.0), Edge::new(b, a, 1.0)])
            .collect();
        Self::new(n, edges)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display name of a node: its label if present, otherwise `node_{i}`.
    pub fn label(&self, node: usize) -> String {
        match &self.labels {
            Some(l) => l[node].clone(),
            None => format!("node_{node}"),
        }
    }

    /// Sum of incoming edge weights per node.
    pub fn in_weight_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for e in &self.edges {
            sums[e.dst] += e.weight;
        }
        sums
    }

    /// Mean number of incoming edges per node.
    pub fn mean_degree(&self) -> f64 {
        self.edges.len() as f64 / self.n as f64
    }

    fn adjacency(&self, reversed: bool) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            if reversed {
                adj[e.dst].push(e.src);
            } else {
                adj[e.src].push(e.dst);
            }
        }
        adj
    }
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == adj.len()
}

/// True iff every node reaches every other node along directed edges.
pub fn is_strongly_connected(g: &NetworkGraph) -> bool {
    reaches_all(&g.adjacency(false)) && reaches_all(&g.adjacency(true))
}

/// Dense Laplacian of a digraph.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix(DMatrix<f64>);

impl LaplacianMatrix {
    /// Wraps a dense matrix after checking squareness and zero row sums.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let lap = LaplacianMatrix(m);
        if let Some((row, sum)) = lap.worst_row_sum(1e-10) {
            return Err(Error::InvalidGraph(format!(
                "Laplacian row {row} sums to {sum:e}"
            )));
        }
        Ok(lap)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Returns the first row whose sum exceeds `tol` times the largest row
    /// absolute sum, if any.
    pub fn worst_row_sum(&self, tol: f64) -> Option<(usize, f64)> {
        let m = &self.0;
        let scale = m
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        m.row_iter()
            .map(|r| r.sum())
            .enumerate()
            .find(|(_, s)| s.abs() > tol * scale)
    }

    /// Symmetric within `tol` relative to the largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = &self.0;
        let scale = m.amax().max(f64::MIN_POSITIVE);
        (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol * scale))
    }
}

pub fn build_laplacian(g: &NetworkGraph) -> LaplacianMatrix {
    let mut m = DMatrix::zeros(g.n, g.n);
    for e in &g.edges {
        m[(e.dst, e.src)] -= e.weight;
        m[(e.dst, e.dst)] += e.weight;
    }
    LaplacianMatrix(m)
}

/// `A = I - L`, checked to be row-stochastic with a nonnegative diagonal.
pub fn consensus_matrix(g: &NetworkGraph) -> Result<DMatrix<f64>> {
    for (node, sum) in g.in_weight_sums().into_iter().enumerate() {
        if sum > 1.0 + 1e-12 {
            return Err(Error::NotStochastic { node, sum });
        }
    }
    let mut a = -build_laplacian(g).into_matrix();
    for i in 0..g.n {
        a[(i, i)] += 1.0;
    }
    a.apply(|v| {
        if *v < 0.0 && *v >= -1e-12 {
            *v = 0.0
        }
    });
    Ok(a)
}

/// How edge weights are assigned in the geometric generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    /// Each incoming edge of node `j` gets `row_sum / in_degree(j)`, so every
    /// node's incoming weights sum to `row_sum`. The Laplacian is generally
    /// not symmetric.
    #[default]
    InDegree,
    /// Every edge gets `row_sum / max_in_degree`; the Laplacian is symmetric
    /// and incoming sums are at most `row_sum`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricParams {
    pub n: usize,
    pub radius: f64,
    pub row_sum: f64,
    pub seed: u64,
    pub weights: WeightScheme,
    pub max_attempts: usize,
}

impl GeometricParams {
    pub fn new(n: usize, radius: f64, row_sum: f64, seed: u64) -> Self {
        GeometricParams {
            n,
            radius,
            row_sum,
            seed,
            weights: WeightScheme::InDegree,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn weights(mut self, weights: WeightScheme) -> Self {
        self.weights = weights;
        self
    }

    pub fn generate(&self) -> Result<GeometricGraph> {
        if self.n < 2 {
            return Err(Error::Config(format!("geometric graph needs n >= 2, got {}", self.n)));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::Config(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.row_sum > 0.0 && self.row_sum < 1.0) {
            return Err(Error::Config(format!(
                "row sum must lie in (0, 1), got {}",
                self.row_sum
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for attempt in 1..=self.max_attempts {
            let coords: Vec<[f64; 2]> = (0..self.n)
                .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
                .collect();
            let graph = self.connect(&coords)?;
            if is_strongly_connected(&graph) {
                return Ok(GeometricGraph {
                    graph,
                    coords,
                    attempts: attempt,
                });
            }
        }
        Err(Error::NotConnected {
            n: self.n,
            radius: self.radius,
            attempts: self.max_attempts,
        })
    }

    fn connect(&self, coords: &[[f64; 2]]) -> Result<NetworkGraph> {
        let n = coords.len();
        let r2 = self.radius * self.radius;
        let mut neighbours = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = coords[i][0] - coords[j][0];
                let dy = coords[i][1] - coords[j][1];
                if dx * dx + dy * dy <= r2 {
                    neighbours[i].push(j);
                    neighbours[j].push(i);
                }
            }
        }
        let max_degree = neighbours.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let mut edges = Vec::new();
        for (dst, srcs) in neighbours.iter().enumerate() {
            let w = match self.weights {
                WeightScheme::InDegree => self.row_sum / srcs.len().max(1) as f64,
                WeightScheme::Uniform => self.row_sum / max_degree as f64,
            };
            edges.extend(srcs.iter().map(|&src| Edge::new(src, dst, w)));
        }
        NetworkGraph::new(n, edges)
    }
}

/// A generated graph together with its node positions in the unit square.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    pub graph: NetworkGraph,
    pub coords: Vec<[f64; 2]>,
    /// Number of placements drawn before a strongly connected one was found.
    pub attempts: usize,
}

/// Random geometric graph with in-degree normalised weights.
pub fn random_geometric_graph(n: usize, radius: f64, row_sum: f64, seed: u64) -> Result<GeometricGraph> {
    GeometricParams::new(n, radius, row_sum, seed).generate()
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses the `src dst weight` edge-list format.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<NetworkGraph> {
    let mut declared = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "nodes" {
            if fields.len() != 2 || declared.is_some() || !edges.is_empty() {
                return Err(Error::parse(path, line_no, "malformed `nodes N` header"));
            }
            let n = fields[1]
                .parse::<usize>()
                .map_err(|e| Error::parse(path, line_no, format!("node count: {e}")))?;
            declared = Some(n);
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected `src dst weight`, found {} fields", fields.len()),
            ));
        }
        let idx_field = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::parse(path, line_no, format!("{what}: {e}")))
        };
        let src = idx_field(fields[0], "src")?;
        let dst = idx_field(fields[1], "dst")?;
        let weight = fields[2]
            .parse::<f64>()
            .map_err(|e| Error::parse(path, line_no, format!("weight: {e}")))?;
        edges.push(Edge::new(src, dst, weight));
    }
    let n = declared.unwrap_or_else(|| {
        edges
            .iter()
            .map(|e| e.src.max(e.dst) + 1)
            .max()
            .unwrap_or(0)
    });
    NetworkGraph::new(n, edges)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<NetworkGraph> {
    let path = path.as_ref();
    parse_edge_list(&read_text(path)?, path)
}

/// Serialises a graph in the edge-list format, always with a `nodes` header.
pub fn format_edge_list(g: &NetworkGraph) -> String {
    let mut out = format!("nodes {}\n", g.n);
    for e in &g.edges {
        let _ = writeln!(out, "{} {} {}", e.src, e.dst, e.weight);
    }
    out
}

/// One label per line; line number is the node index.
pub fn parse_labels(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.trim_end_matches('\r').trim().to_string())
        .filter(|l| !l.is_empty())
        .collect()
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<String>> {
    Ok(parse_labels(&read_text(path.as_ref())?))
}

/// Coordinates CSV with header `node,x,y`.
pub fn format_coords(coords: &[[f64; 2]]) -> String {
    let mut out = String::from("node,x,y\n");
    for (i, c) in coords.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{}", c[0], c[1]);
    }
    out
}

pub fn parse_coords(text: &str, path: &Path) -> Result<Vec<[f64; 2]>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut coords = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 3 {
            return Err(Error::parse(path, line, "expected `node,x,y`"));
        }
        let node: usize = rec[0]
            .parse()
            .map_err(|e| Error::parse(path, line, format!("node: {e}")))?;
        if node != coords.len() {
            return Err(Error::parse(path, line, format!("expected node {}, found {node}", coords.len())));
        }
        let x: f64 = rec[1]
            .parse()
            .map_err(|e| Error::parse(path, line, format!("x: {e}")))?;
        let y: f64 = rec[2]
            .parse()
            .map_err(|e| Error::parse(path, line, format!("y: {e}")))?;
        coords.push([x, y]);
    }
    Ok(coords)
}

pub fn read_coords(path: impl AsRef<Path>) -> Result<Vec<[f64; 2]>> {
    let path = path.as_ref();
    parse_coords(&read_text(path)?, path)
}
