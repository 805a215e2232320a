//! Two-stage stochastic voter model with stubborn (pinned) nodes.
//!
//! Stage 1 computes `y = A x`; stage 2 sets each free node to 1 with
//! probability `y_i`. Pinned nodes keep their status but still feed their
//! neighbours' averages.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compress::Snapshot;
use crate::consensus::{instance_rng, normalize_times, SparseRows};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

/// Snapshot time used for compressibility studies.
pub const DEFAULT_SNAPSHOT_TIME: usize = 500;

/// Probabilities this close to 0 or 1 are snapped, so absorbing states stay
/// absorbing despite rounding in `A x`.
const PROB_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Independent fair coin per node.
    FairCoin,
    Fixed(Vec<u8>),
}

#[derive(Debug, Clone)]
pub struct VoterConfig {
    pub a: DMatrix<f64>,
    pub pinned: Vec<(usize, u8)>,
    pub k_max: usize,
    pub ensemble_size: usize,
    pub seed: u64,
    pub snapshot_times: Vec<usize>,
    pub initial: InitialState,
}

impl VoterConfig {
    pub fn new(a: DMatrix<f64>, k_max: usize, ensemble_size: usize, seed: u64) -> Self {
        VoterConfig {
            a,
            pinned: Vec::new(),
            k_max,
            ensemble_size,
            seed,
            snapshot_times: vec![k_max],
            initial: InitialState::FairCoin,
        }
    }

    pub fn pinned(mut self, pinned: Vec<(usize, u8)>) -> Self {
        self.pinned = pinned;
        self
    }

    pub fn snapshot_times(mut self, times: Vec<usize>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    /// Pins node 0 at status 0 and node `n - 1` at status 1.
    pub fn default_pins(n: usize) -> Vec<(usize, u8)> {
        vec![(0, 0), (n - 1, 1)]
    }

    fn validate(&self, n: usize) -> Result<Vec<Option<u8>>> {
        let mut pins = vec![None; n];
        for &(node, status) in &self.pinned {
            if node >= n {
                return Err(Error::Config(format!("pinned node {node} out of range 0..{n}")));
            }
            if status > 1 {
                return Err(Error::Config(format!("pinned status {status} is not 0 or 1")));
            }
            if pins[node].replace(status).is_some() {
                return Err(Error::Config(format!("node {node} pinned twice")));
            }
        }
        if let InitialState::Fixed(x0) = &self.initial {
            if x0.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: x0.len(),
                });
            }
            if x0.iter().any(|&v| v > 1) {
                return Err(Error::Config("initial state must be 0/1".into()));
            }
        }
        Ok(pins)
    }
}

pub fn simulate_voter(cfg: &VoterConfig) -> Result<Vec<Snapshot>> {
    simulate_voter_with(cfg, Execution::default())
}

pub fn simulate_voter_with(cfg: &VoterConfig, exec: Execution) -> Result<Vec<Snapshot>> {
    let a = SparseRows::row_stochastic(&cfg.a)?;
    let n = a.n();
    let pins = cfg.validate(n)?;
    let times = normalize_times(&cfg.snapshot_times, cfg.k_max)?;

    let runs = map_indexed(exec, cfg.ensemble_size, |inst| {
        let mut rng = instance_rng(cfg.seed, inst);
        let mut x: Vec<f64> = match &cfg.initial {
            InitialState::FairCoin => (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect(),
            InitialState::Fixed(x0) => x0.iter().map(|&v| f64::from(v)).collect(),
        };
        apply_pins(&mut x, &pins);
        let mut y = vec![0.0; n];
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
            a.apply(&x, &mut y);
            for (i, xi) in x.iter_mut().enumerate() {
                if pins[i].is_some() {
                    continue;
                }
                let p = y[i];
                let u: f64 = rng.random();
                *xi = if p >= 1.0 - PROB_SNAP {
                    1.0
                } else if p <= PROB_SNAP {
                    0.0
                } else {
                    f64::from(u8::from(u < p))
                };
            }
            apply_pins(&mut x, &pins);
        }
        snaps
    });
    Ok(runs.into_iter().flatten().collect())
}

fn apply_pins(x: &mut [f64], pins: &[Option<u8>]) {
    for (xi, p) in x.iter_mut().zip(pins) {
        if let Some(s) = p {
            *xi = f64::from(*s);
        }
    }
}

/// Fixed point of `m = A m` on the free nodes with pinned entries held at
/// their statuses: solves `(I - A_ff) m_f = A_fp p`.
pub fn voter_mean_field(cfg: &VoterConfig) -> Result<Vec<f64>> {
    let a = SparseRows::row_stochastic(&cfg.a)?;
    let n = a.n();
    let pins = cfg.validate(n)?;
    let free: Vec<usize> = (0..n).filter(|&i| pins[i].is_none()).collect();
    let mut mean: Vec<f64> = pins.iter().map(|p| p.map_or(0.0, f64::from)).collect();
    if free.is_empty() {
        return Ok(mean);
    }
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = k;
    }
    let f = free.len();
    let mut m: DMatrix<f64> = DMatrix::identity(f, f);
    let mut rhs: DVector<f64> = DVector::zeros(f);
    for (r, &i) in free.iter().enumerate() {
        for &(j, w) in a.row(i) {
            match pins[j] {
                Some(s) => rhs[r] += w * f64::from(s),
                None => m[(r, pos[j])] -= w,
            }
        }
    }
    let lu = m.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("free block of the pinned voter model has no unique fixed point".into()))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("mean-field solution is not finite".into()));
    }
    for (k, &i) in free.iter().enumerate() {
        mean[i] = sol[k];
    }
    Ok(mean)
}
