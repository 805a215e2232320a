use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("edge ({src} -> {dst}): {reason}")]
    InvalidEdge {
        src: usize,
        dst: usize,
        reason: String,
    },

    #[error(
        "no strongly connected geometric graph after {attempts} placements (n={n}, radius={radius}); try a larger radius"
    )]
    NotConnected { n: usize, radius: f64, attempts: usize },

    #[error("node {node}: incoming weight sum {sum} exceeds 1")]
    NotStochastic { node: usize, sum: f64 },

    #[error("matrix row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("defective or ill-conditioned eigenbasis (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("snapshot has zero energy; energy fraction is undefined")]
    ZeroSnapshot,

    #[error("sparsity K={k} out of range 1..={n}")]
    SparsityOutOfRange { k: usize, n: usize },

    #[error("outside Theorem 1 regime: {0}")]
    OutsideTheoremRegime(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
