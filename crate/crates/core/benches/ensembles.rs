//! Sequential vs rayon-parallel ensemble work on the 200-node setup.
//!
//! Without the `parallel` feature both variants run the same sequential loop.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lapcompress::compress::{energy_curve_with, CurveOptions};
use lapcompress::consensus::{simulate_consensus_with, ConsensusConfig, InputNode};
use lapcompress::graph::{build_laplacian, consensus_matrix, GeometricParams, DEFAULT_RADIUS};
use lapcompress::spectral::eigenbasis;
use lapcompress::voter::{simulate_voter_with, VoterConfig};
use lapcompress::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ensembles(c: &mut Criterion) {
    let g = GeometricParams::new(200, DEFAULT_RADIUS, 0.8, 7).generate().unwrap();
    let a = consensus_matrix(&g.graph).unwrap();
    let basis = eigenbasis(&build_laplacian(&g.graph)).unwrap();

    let consensus = ConsensusConfig::new(a.clone(), InputNode::Random, 400, 100, 1);
    let voter = VoterConfig::new(a, 500, 100, 1).pinned(VoterConfig::default_pins(200));
    let snaps = simulate_consensus_with(&consensus, Execution::default()).unwrap().snapshots;
    let ks = [1, 2, 5, 10, 20, 40];

    let mut group = c.benchmark_group("ensembles");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("consensus_100x400", name), &exec, |b, &e| {
            b.iter(|| simulate_consensus_with(&consensus, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("voter_100x500", name), &exec, |b, &e| {
            b.iter(|| simulate_voter_with(&voter, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("energy_curve_100", name), &exec, |b, &e| {
            b.iter(|| energy_curve_with(&basis, &snaps, &ks, CurveOptions { round: true, refit: false }, e).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ensembles);
criterion_main!(benches);
