//! Compressibility of network opinion and spread snapshots in the
//! Laplacian-eigenvector basis.
//!
//! The crate covers the whole pipeline: weighted digraphs and their
//! Laplacians ([`graph`]), the realified eigenvector basis ([`spectral`]),
//! K-sparse approximation and energy fractions ([`compress`]), the two
//! stochastic network models ([`consensus`], [`voter`]), closed-form second
//! moments and the whitening basis for the consensus model
//! ([`ensemble_stats`]), field-data loading ([`ingest`]) and plot-ready
//! report assembly ([`report`]).
//!
//! Monte-Carlo ensembles run on rayon when the `parallel` feature is enabled
//! (the default); see [`par`].

pub mod compress;
pub mod consensus;
pub mod ensemble_stats;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod par;
pub mod report;
pub mod spectral;
pub mod voter;

pub use compress::{
    dominant_basis_table, energy_curve, energy_fraction, k_sparse, match_fraction, reconstruct,
    round_to_binary, EnergyCurve, Snapshot, SparseApprox,
};
pub use error::{Error, Result};
pub use graph::{build_laplacian, consensus_matrix, is_strongly_connected, LaplacianMatrix, NetworkGraph};
pub use par::Execution;
pub use spectral::{eigenbasis, LaplacianBasis};
