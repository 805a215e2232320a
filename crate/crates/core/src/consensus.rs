//! Linear consensus model driven by Gaussian noise at one node:
//! `x[k+1] = A x[k] + B u[k]`, `x[0] = 0`.
//!
//! Each instance draws from its own ChaCha stream selected by
//! `(seed, instance_id)`, so ensembles are reproducible whatever the
//! execution strategy.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::compress::Snapshot;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::spectral::LaplacianBasis;

/// Default ensemble size for energy-curve studies.
pub const DEFAULT_ENSEMBLE_SIZE: usize = 100;

/// Nonzero entries of a row-stochastic matrix, row by row.
#[derive(Debug, Clone)]
pub(crate) struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    /// Checks rows sum to 1 within 1e-10 and entries are nonnegative
    /// (within 1e-12).
    pub(crate) fn row_stochastic(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::Dimension {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let mut rows = Vec::with_capacity(a.nrows());
        for (i, row) in a.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-10 || row.iter().any(|&v| v < -1e-12) {
                return Err(Error::RowSum { row: i, sum });
            }
            rows.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect(),
            );
        }
        Ok(SparseRows { rows })
    }

    pub(crate) fn n(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub(crate) fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, a)| a * x[j]).sum();
        }
    }
}

pub(crate) fn instance_rng(seed: u64, instance_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance_id as u64);
    rng
}

pub(crate) fn normalize_times(times: &[usize], k_max: usize) -> Result<Vec<usize>> {
    if times.is_empty() {
        return Err(Error::Config("snapshot_times must not be empty".into()));
    }
    if let Some(&t) = times.iter().find(|&&t| t > k_max) {
        return Err(Error::Config(format!("snapshot time {t} exceeds horizon {k_max}")));
    }
    let mut t = times.to_vec();
    t.sort_unstable();
    t.dedup();
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputNode {
    Fixed(usize),
    /// Drawn uniformly per instance.
    Random,
}

#[derive(Debug, Clone)]
pub struct ConsensusConfig {
    pub a: DMatrix<f64>,
    pub input: InputNode,
    pub k_max: usize,
    pub ensemble_size: usize,
    pub seed: u64,
    pub snapshot_times: Vec<usize>,
    /// Disables the input when false; used to check undriven convergence.
    pub driven: bool,
    /// Starting state; zero when `None`.
    pub initial_state: Option<Vec<f64>>,
}

impl ConsensusConfig {
    pub fn new(a: DMatrix<f64>, input: InputNode, k_max: usize, ensemble_size: usize, seed: u64) -> Self {
        ConsensusConfig {
            a,
            input,
            k_max,
            ensemble_size,
            seed,
            snapshot_times: vec![k_max],
            driven: true,
            initial_state: None,
        }
    }

    pub fn snapshot_times(mut self, times: Vec<usize>) -> Self {
        self.snapshot_times = times;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusRun {
    /// Ordered by `(instance_id, time_index)`.
    pub snapshots: Vec<Snapshot>,
    /// Realised input node per instance.
    pub input_nodes: Vec<usize>,
}

impl ConsensusRun {
    /// Snapshots recorded at time `k`, in instance order.
    pub fn at_time(&self, k: usize) -> Vec<Snapshot> {
        self.snapshots
            .iter()
            .filter(|s| s.time_index == k)
            .cloned()
            .collect()
    }

    /// CSV with header `instance_id,input_node`.
    pub fn input_nodes_csv(&self) -> String {
        let mut out = String::from("instance_id,input_node\n");
        for (i, z) in self.input_nodes.iter().enumerate() {
            out.push_str(&format!("{i},{z}\n"));
        }
        out
    }
}

pub fn simulate_consensus(cfg: &ConsensusConfig) -> Result<ConsensusRun> {
    simulate_consensus_with(cfg, Execution::default())
}

pub fn simulate_consensus_with(cfg: &ConsensusConfig, exec: Execution) -> Result<ConsensusRun> {
    let a = SparseRows::row_stochastic(&cfg.a)?;
    let n = a.n();
    if let InputNode::Fixed(z) = cfg.input {
        if z >= n {
            return Err(Error::Config(format!("input node {z} out of range 0..{n}")));
        }
    }
    if let Some(x0) = &cfg.initial_state {
        if x0.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x0.len(),
            });
        }
    }
    let times = normalize_times(&cfg.snapshot_times, cfg.k_max)?;

    let runs = map_indexed(exec, cfg.ensemble_size, |inst| {
        let mut rng = instance_rng(cfg.seed, inst);
        let z = match cfg.input {
            InputNode::Fixed(z) => z,
            InputNode::Random => rng.random_range(0..n),
        };
        let mut x = cfg.initial_state.clone().unwrap_or_else(|| vec![0.0; n]);
        let mut next = vec![0.0; n];
        let mut snaps = Vec::with_capacity(times.len());
        let mut pending = times.iter().peekable();
        for k in 0..=cfg.k_max {
            if pending.peek() == Some(&&k) {
                pending.next();
                snaps.push(Snapshot {
                    values: x.clone(),
                    time_index: k,
                    instance_id: inst,
                });
            }
            if k == cfg.k_max {
                break;
            }
            a.apply(&x, &mut next);
            if cfg.driven {
                let u: f64 = rng.sample(StandardNormal);
                next[z] += u;
            }
            std::mem::swap(&mut x, &mut next);
        }
        (snaps, z)
    });

    let mut snapshots = Vec::with_capacity(cfg.ensemble_size * times.len());
    let mut input_nodes = Vec::with_capacity(cfg.ensemble_size);
    for (snaps, z) in runs {
        snapshots.extend(snaps);
        input_nodes.push(z);
    }
    Ok(ConsensusRun {
        snapshots,
        input_nodes,
    })
}

/// Ensemble average of `s sᵀ` with `s = W x`, over snapshots sharing one
/// time index.
pub fn ensemble_moment(snapshots: &[Snapshot], basis: &LaplacianBasis) -> Result<DMatrix<f64>> {
    if snapshots.len() < 2 {
        return Err(Error::Config("ensemble moment needs at least 2 snapshots".into()));
    }
    let k = snapshots[0].time_index;
    if let Some(s) = snapshots.iter().find(|s| s.time_index != k) {
        return Err(Error::Config(format!(
            "mixed time indices {k} and {} in ensemble moment",
            s.time_index
        )));
    }
    let n = basis.n();
    let mut acc = DMatrix::zeros(n, n);
    for snap in snapshots {
        let s: DVector<f64> = basis.components(&snap.values)?;
        acc.syger(1.0, &s, &s, 1.0);
    }
    // syger fills the lower triangle only.
    acc.fill_upper_triangle_with_lower_triangle();
    Ok(acc / snapshots.len() as f64)
}
