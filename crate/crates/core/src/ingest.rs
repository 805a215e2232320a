//! Snapshot files and field datasets.
//!
//! Two CSV layouts share one parser:
//!
//! * ensemble files, header `instance_id,time_index,node_0,...`, written by
//!   the simulators;
//! * field files, header `time_index,node_0,...` (or node labels in place of
//!   `node_i`), one row per day.
//!
//! Field rows may have missing values (empty, `NA`, `nan`). They are
//! forward-filled from the previous day; leading gaps take the first
//! available value; a day with no values at all is dropped.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::compress::Snapshot;
use crate::error::{Error, Result};
use crate::graph::{build_laplacian, read_coords, read_edge_list, read_labels, NetworkGraph};

/// Bundled contiguity graph of the 48 contiguous states and DC.
pub const US_CONTIGUOUS_EDGES: &str = include_str!("../data/us_contiguous.edges");
pub const US_CONTIGUOUS_LABELS: &str = include_str!("../data/us_contiguous.labels");
/// Approximate state centroids as `(longitude, latitude)`.
pub const US_CONTIGUOUS_COORDS: &str = include_str!("../data/us_contiguous.coords.csv");
/// 250 days of synthetic positivity rates on the bundled graph, produced by
/// [`synthesize_field_data`] with [`SynthParams::default`] and
/// [`FIXTURE_SEED`].
pub const US_SYNTHETIC_POSITIVITY: &str = include_str!("../data/us_positivity_synthetic.csv");
pub const FIXTURE_SEED: u64 = 2020;
pub const FIXTURE_DAYS: usize = 250;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDataset {
    pub label: String,
    pub graph: NetworkGraph,
    /// One snapshot per day, strictly increasing `time_index`.
    pub snapshots: Vec<Snapshot>,
    /// Days dropped during cleaning because every value was missing.
    pub dropped_days: Vec<usize>,
}

impl FieldDataset {
    fn check(&self) -> Result<()> {
        let n = self.graph.n();
        if n < 2 {
            return Err(Error::Config(format!("field dataset needs at least 2 nodes, got {n}")));
        }
        for w in self.snapshots.windows(2) {
            if w[1].time_index <= w[0].time_index {
                return Err(Error::Config(format!(
                    "time indices not strictly increasing at day {}",
                    w[1].time_index
                )));
            }
        }
        if let Some(s) = self.snapshots.iter().find(|s| s.n() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: s.n(),
            });
        }
        Ok(())
    }
}

/// The bundled contiguity graph with state labels.
pub fn us_contiguous_graph() -> NetworkGraph {
    crate::graph::parse_edge_list(US_CONTIGUOUS_EDGES, Path::new("us_contiguous.edges"))
        .and_then(|g| g.with_labels(crate::graph::parse_labels(US_CONTIGUOUS_LABELS)))
        .expect("bundled graph is valid")
}

pub fn us_contiguous_coords() -> Vec<[f64; 2]> {
    crate::graph::parse_coords(US_CONTIGUOUS_COORDS, Path::new("us_contiguous.coords.csv"))
        .expect("bundled coordinates are valid")
}

/// The bundled synthetic fixture as a dataset.
pub fn us_synthetic_dataset() -> Result<FieldDataset> {
    parse_field_dataset(
        us_contiguous_graph(),
        US_SYNTHETIC_POSITIVITY,
        Path::new("us_positivity_synthetic.csv"),
    )
}

pub fn load_dataset(edge_file: impl AsRef<Path>, snapshot_file: impl AsRef<Path>) -> Result<FieldDataset> {
    load_dataset_with_labels(edge_file, snapshot_file, None::<&Path>)
}

/// Loads a field dataset; with a label file the snapshot header may name
/// nodes by label.
pub fn load_dataset_with_labels(
    edge_file: impl AsRef<Path>,
    snapshot_file: impl AsRef<Path>,
    labels: Option<impl AsRef<Path>>,
) -> Result<FieldDataset> {
    let mut graph = read_edge_list(edge_file)?;
    if let Some(l) = labels {
        graph = graph.with_labels(read_labels(l)?)?;
    }
    let path = snapshot_file.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field_dataset(graph, &text, path)
}

/// Builds a cleaned dataset from field-layout CSV text; the label is the
/// file stem of `path`.
pub fn parse_field_dataset(graph: NetworkGraph, text: &str, path: &Path) -> Result<FieldDataset> {
    let table = parse_snapshot_table(text, path, Some(&graph))?;
    if table.has_instance {
        return Err(Error::parse(path, 1, "field data must not have an instance_id column"));
    }
    let (snapshots, dropped_days) = clean(table.rows, graph.n())?;
    let ds = FieldDataset {
        label: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        graph,
        snapshots,
        dropped_days,
    };
    ds.check()?;
    Ok(ds)
}

/// Raw parsed rows: `(instance_id, time_index, values)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTable {
    pub has_instance: bool,
    pub rows: Vec<(usize, usize, Vec<Option<f64>>)>,
}

fn is_missing(field: &str) -> bool {
    matches!(field.to_ascii_lowercase().as_str(), "" | "na" | "nan" | "null")
}

/// Parses either CSV layout. When `graph` is given, the node count must
/// match and labelled headers are mapped onto node indices.
pub fn parse_snapshot_table(text: &str, path: &Path, graph: Option<&NetworkGraph>) -> Result<SnapshotTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let split = |l: &str| -> Vec<String> { l.split(',').map(|f| f.trim().to_string()).collect() };
    let header = match lines.next() {
        Some((_, h)) => split(h),
        None => return Err(Error::parse(path, 1, "empty snapshot file")),
    };
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let has_instance = header.first() == Some(&"instance_id");
    let lead = if has_instance { 2 } else { 1 };
    let time_col = header.get(lead - 1).copied().unwrap_or("");
    if !matches!(time_col, "time_index" | "day") {
        return Err(Error::parse(
            path,
            1,
            format!("expected `time_index` column, found `{time_col}`"),
        ));
    }
    let names: Vec<&str> = header.iter().skip(lead).copied().collect();
    let n = names.len();
    if let Some(g) = graph {
        if g.n() != n {
            return Err(Error::parse(
                path,
                1,
                format!("header has {n} node columns but the graph has {} nodes", g.n()),
            ));
        }
    }
    let column_to_node = column_mapping(&names, graph).map_err(|m| Error::parse(path, 1, m))?;

    let mut rows = Vec::new();
    for (line, raw) in lines {
        let rec = split(raw);
        if rec.len() != lead + n {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} columns, found {}", lead + n, rec.len()),
            ));
        }
        let int = |idx: usize, what: &str| -> Result<usize> {
            rec[idx]
                .parse()
                .map_err(|e| Error::parse(path, line, format!("{what}: {e}")))
        };
        let instance = if has_instance { int(0, "instance_id")? } else { 0 };
        let time = int(lead - 1, "time_index")?;
        let mut values = vec![None; n];
        for (c, field) in rec.iter().skip(lead).enumerate() {
            if is_missing(field.as_str()) {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|e| Error::parse(path, line, format!("column {}: {e}", names[c])))?;
            if !v.is_finite() {
                return Err(Error::parse(path, line, format!("column {}: non-finite value", names[c])));
            }
            values[column_to_node[c]] = Some(v);
        }
        rows.push((instance, time, values));
    }
    Ok(SnapshotTable { has_instance, rows })
}

fn column_mapping(names: &[&str], graph: Option<&NetworkGraph>) -> std::result::Result<Vec<usize>, String> {
    let positional = names
        .iter()
        .enumerate()
        .all(|(i, name)| *name == format!("node_{i}"));
    if positional {
        return Ok((0..names.len()).collect());
    }
    let labels = graph
        .and_then(|g| g.labels())
        .ok_or_else(|| "node columns must be `node_0..` unless a label file is supplied".to_string())?;
    let mut map = Vec::with_capacity(names.len());
    let mut seen = vec![false; labels.len()];
    for name in names {
        let idx = labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| format!("column `{name}` is not a node label"))?;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(format!("column `{name}` appears twice"));
        }
        map.push(idx);
    }
    Ok(map)
}

/// Applies the missing-value rule to field rows (all `instance_id` 0).
pub fn clean(rows: Vec<(usize, usize, Vec<Option<f64>>)>, n: usize) -> Result<(Vec<Snapshot>, Vec<usize>)> {
    let mut kept = Vec::with_capacity(rows.len());
    let mut dropped = Vec::new();
    for (_, day, values) in rows {
        if values.iter().all(Option::is_none) {
            log::warn!("day {day}: no values, dropping snapshot");
            dropped.push(day);
        } else {
            kept.push((day, values));
        }
    }
    let mut first = vec![None; n];
    for (_, values) in &kept {
        for (f, v) in first.iter_mut().zip(values) {
            if f.is_none() {
                *f = *v;
            }
        }
    }
    if let Some(node) = first.iter().position(Option::is_none) {
        return Err(Error::Config(format!("node {node} has no values on any day")));
    }
    let mut last: Vec<f64> = first.into_iter().map(|v| v.unwrap_or(0.0)).collect();
    let snapshots = kept
        .into_iter()
        .map(|(day, values)| {
            for (l, v) in last.iter_mut().zip(&values) {
                if let Some(v) = v {
                    *l = *v;
                }
            }
            Snapshot {
                values: last.clone(),
                time_index: day,
                instance_id: 0,
            }
        })
        .collect();
    Ok((snapshots, dropped))
}

/// Reads a snapshot file of either layout without a graph cross-check.
pub fn read_snapshots(path: impl AsRef<Path>) -> Result<Vec<Snapshot>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let table = parse_snapshot_table(&text, path, None)?;
    if table.has_instance {
        table
            .rows
            .into_iter()
            .map(|(inst, t, v)| {
                let values: Option<Vec<f64>> = v.into_iter().collect();
                let values = values.ok_or_else(|| {
                    Error::Config(format!("{}: instance {inst} time {t} has a missing value", path.display()))
                })?;
                Ok(Snapshot {
                    values,
                    time_index: t,
                    instance_id: inst,
                })
            })
            .collect()
    } else {
        let n = table.rows.first().map_or(0, |r| r.2.len());
        Ok(clean(table.rows, n)?.0)
    }
}

fn header(out: &mut String, n: usize, labels: Option<&[String]>) {
    for i in 0..n {
        match labels {
            Some(l) => {
                let _ = write!(out, ",{}", l[i]);
            }
            None => {
                let _ = write!(out, ",node_{i}");
            }
        }
    }
    out.push('\n');
}

/// Ensemble CSV: `instance_id,time_index,node_0,...`.
pub fn ensemble_csv(snapshots: &[Snapshot]) -> String {
    let n = snapshots.first().map_or(0, Snapshot::n);
    let mut out = String::from("instance_id,time_index");
    header(&mut out, n, None);
    for s in snapshots {
        let _ = write!(out, "{},{}", s.instance_id, s.time_index);
        for v in &s.values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Field CSV: `time_index,<node columns>`.
pub fn field_csv(snapshots: &[Snapshot], labels: Option<&[String]>) -> String {
    let n = snapshots.first().map_or(0, Snapshot::n);
    let mut out = String::from("time_index");
    header(&mut out, n, labels);
    for s in snapshots {
        let _ = write!(out, "{}", s.time_index);
        for v in &s.values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Knobs of the synthetic positivity generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    /// National mean level.
    pub baseline: f64,
    /// Relative amplitude of the slow national wave.
    pub wave: f64,
    pub wave_period: f64,
    /// Number of diffusing regional hotspots.
    pub hotspots: usize,
    pub hotspot_amplitude: f64,
    /// Heat-kernel time used to spread each hotspot over the graph.
    pub diffusion: f64,
    /// Mean additive offset applied on weekend days (day mod 7 in {0, 6}).
    pub weekend_offset: f64,
    /// Standard deviation of persistent per-node deviations.
    pub node_spread: f64,
    /// Standard deviation of day-to-day per-node noise.
    pub noise: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            baseline: 0.1,
            wave: 0.1,
            wave_period: 150.0,
            hotspots: 4,
            hotspot_amplitude: 0.06,
            diffusion: 1.0,
            weekend_offset: 0.015,
            node_spread: 0.05,
            noise: 0.07,
        }
    }
}

pub fn is_weekend(day: usize) -> bool {
    matches!(day % 7, 0 | 6)
}

/// Generates `days` snapshots (days `0..days`) on `graph`.
pub fn synthesize_field_snapshots(graph: &NetworkGraph, days: usize, seed: u64, p: &SynthParams) -> Vec<Snapshot> {
    let n = graph.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = build_laplacian(graph).into_matrix();
    let sym = (&l + l.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let kernel_diag = eig.eigenvalues.map(|lam| (-p.diffusion * lam).exp());
    let heat = &eig.eigenvectors * DMatrix::from_diagonal(&kernel_diag) * eig.eigenvectors.transpose();

    struct Hotspot {
        pattern: DVector<f64>,
        period: f64,
        phase: f64,
    }
    let hotspots: Vec<Hotspot> = (0..p.hotspots)
        .map(|_| {
            let node = rng.random_range(0..n);
            let mut pattern = heat.column(node).into_owned();
            let max = pattern.max();
            if max > 0.0 {
                pattern /= max;
            }
            Hotspot {
                pattern,
                period: rng.random_range(60.0..200.0),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            }
        })
        .collect();
    let mut weekend: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = weekend.iter().sum::<f64>() / n as f64;
    weekend.iter_mut().for_each(|w| *w = p.weekend_offset * (1.0 + 0.5 * (*w - mean)));
    let spread: Vec<f64> = (0..n)
        .map(|_| p.node_spread * rng.sample::<f64, _>(StandardNormal))
        .collect();

    (0..days)
        .map(|day| {
            let t = day as f64;
            let level = p.baseline * (1.0 + p.wave * (std::f64::consts::TAU * t / p.wave_period).sin());
            let mut x = DVector::from_element(n, level);
            for h in &hotspots {
                let amp = p.hotspot_amplitude * 0.5 * (1.0 + (std::f64::consts::TAU * t / h.period + h.phase).sin());
                x.axpy(amp, &h.pattern, 1.0);
            }
            for i in 0..n {
                x[i] += spread[i];
                if is_weekend(day) {
                    x[i] += weekend[i];
                }
                if p.noise > 0.0 {
                    x[i] += p.noise * rng.sample::<f64, _>(StandardNormal);
                }
            }
            Snapshot {
                values: x.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
                time_index: day,
                instance_id: 0,
            }
        })
        .collect()
}

/// Synthetic field data as a field CSV (labelled header when the graph has
/// labels).
pub fn synthesize_field_data(graph: &NetworkGraph, days: usize, seed: u64) -> String {
    let snaps = synthesize_field_snapshots(graph, days, seed, &SynthParams::default());
    field_csv(&snaps, graph.labels())
}

/// Coordinates for a dataset's graph, if a coordinates file is given.
pub fn load_coords(path: Option<impl AsRef<Path>>, n: usize) -> Result<Option<Vec<[f64; 2]>>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let c = read_coords(p)?;
            if c.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: c.len(),
                });
            }
            Ok(Some(c))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("t.csv")
    }

    #[test]
    fn bundled_graph() {
        let g = us_contiguous_graph();
        assert_eq!(g.n(), 49);
        assert_eq!(g.edges().len(), 214);
        assert!(crate::graph::is_strongly_connected(&g));
        assert_eq!(g.label(0), "AL");
        assert_eq!(us_contiguous_coords().len(), 49);
    }

    #[test]
    fn forward_fill_rules() {
        let text = "time_index,node_0,node_1,node_2\n0,,1,NA\n1,0.5,,2\n2,,,\n3,0.7,3,\n";
        let t = parse_snapshot_table(text, p(), None).unwrap();
        let (snaps, dropped) = clean(t.rows, 3).unwrap();
        assert_eq!(dropped, vec![2]);
        let vals: Vec<Vec<f64>> = snaps.iter().map(|s| s.values.clone()).collect();
        assert_eq!(vals, vec![vec![0.5, 1.0, 2.0], vec![0.5, 1.0, 2.0], vec![0.7, 3.0, 2.0]]);
        assert_eq!(snaps[2].time_index, 3);
    }

    #[test]
    fn cleaning_is_idempotent() {
        let text = "time_index,node_0,node_1\n0,,1\n1,0.5,\n";
        let t = parse_snapshot_table(text, p(), None).unwrap();
        let (once, _) = clean(t.rows, 2).unwrap();
        let again_text = field_csv(&once, None);
        let t2 = parse_snapshot_table(&again_text, p(), None).unwrap();
        let (twice, dropped) = clean(t2.rows, 2).unwrap();
        assert_eq!(once, twice);
        assert!(dropped.is_empty());
    }

    #[test]
    fn parse_errors_name_lines() {
        let err = parse_snapshot_table("time_index,node_0,node_1\n0,1,2\n1,3\n", p(), None).unwrap_err();
        assert_eq!(err.to_string(), "t.csv:3: expected 3 columns, found 2");
        let err = parse_snapshot_table("time_index,node_0\n0,abc\n", p(), None).unwrap_err();
        assert!(err.to_string().starts_with("t.csv:2: column node_0"));
        let err = parse_snapshot_table("when,node_0\n", p(), None).unwrap_err();
        assert!(err.to_string().contains("time_index"));
        let g = NetworkGraph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let err = parse_snapshot_table("time_index,node_0,node_1\n", p(), Some(&g)).unwrap_err();
        assert!(err.to_string().contains("graph has 3 nodes"));
    }

    #[test]
    fn labelled_header_maps_columns() {
        let g = NetworkGraph::undirected(2, &[(0, 1)])
            .unwrap()
            .with_labels(vec!["WA".into(), "OR".into()])
            .unwrap();
        let t = parse_snapshot_table("time_index,OR,WA\n0,1,2\n", p(), Some(&g)).unwrap();
        assert_eq!(t.rows[0].2, vec![Some(2.0), Some(1.0)]);
        assert!(parse_snapshot_table("time_index,OR,ID\n", p(), Some(&g)).is_err());
    }

    #[test]
    fn ensemble_round_trip() {
        let snaps = vec![
            Snapshot::new(vec![0.1, -2.5e-7, 1.0 / 3.0], 400, 0).unwrap(),
            Snapshot::new(vec![0.0, 1.0, 0.0], 400, 1).unwrap(),
        ];
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("e.csv");
        std::fs::write(&f, ensemble_csv(&snaps)).unwrap();
        assert_eq!(read_snapshots(&f).unwrap(), snaps);
        assert!(ensemble_csv(&snaps[1..]).ends_with("1,400,0,1,0\n"));
    }

    #[test]
    fn weekend_offset_visible_without_noise() {
        let g = us_contiguous_graph();
        let params = SynthParams {
            noise: 0.0,
            wave: 0.0,
            hotspot_amplitude: 0.0,
            ..SynthParams::default()
        };
        let s = synthesize_field_snapshots(&g, 7, 1, &params);
        let mean = |d: usize| s[d].values.iter().sum::<f64>() / 49.0;
        for weekend in [0, 6] {
            for mid in 1..6 {
                let diff = mean(weekend) - mean(mid);
                assert!((diff - params.weekend_offset).abs() < 1e-12, "{diff}");
            }
        }
    }

    #[test]
    fn zero_noise_is_noise_free() {
        let g = us_contiguous_graph();
        let params = SynthParams {
            noise: 0.0,
            ..SynthParams::default()
        };
        let a = synthesize_field_snapshots(&g, 14, 3, &params);
        // Same weekday one week apart differs only through the smooth
        // deterministic wave and hotspot terms.
        let b = synthesize_field_snapshots(&g, 14, 3, &params);
        assert_eq!(a, b);
        let jump: f64 = a[8].values.iter().zip(&a[1].values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(jump < 0.05);
    }

    #[test]
    fn toy_dataset_loads() {
        let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
        let ds = load_dataset(data.join("toy3.edges"), data.join("toy3.csv")).unwrap();
        assert_eq!(ds.graph.n(), 3);
        assert_eq!(ds.snapshots.len(), 5);
        assert_eq!(ds.snapshots[1].values, vec![0.25, 0.4, 0.55]);
        assert_eq!(ds.label, "toy3");
    }

    #[test]
    fn crlf_and_blank_lines() {
        let text = "time_index,node_0,node_1\r\n0,1,2\r\n\r\n1,3\r\n";
        let err = parse_snapshot_table(text, p(), None).unwrap_err();
        assert_eq!(err.to_string(), "t.csv:4: expected 3 columns, found 2");
    }

    #[test]
    fn load_rejects_mismatch_and_tiny_graphs() {
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("g.edges");
        let s = dir.path().join("s.csv");
        std::fs::write(&e, "nodes 2\n0 1 1\n1 0 1\n").unwrap();
        std::fs::write(&s, "time_index,node_0,node_1,node_2\n0,1,2,3\n").unwrap();
        assert!(load_dataset(&e, &s).unwrap_err().to_string().contains("graph has 2 nodes"));
        std::fs::write(&e, "nodes 1\n").unwrap();
        std::fs::write(&s, "time_index,node_0\n0,1\n").unwrap();
        assert!(load_dataset(&e, &s).is_err());
    }

    #[test]
    fn field_round_trip_is_bitwise() {
        let ds = us_synthetic_dataset().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("g.edges");
        let s = dir.path().join("s.csv");
        std::fs::write(&e, crate::graph::format_edge_list(&ds.graph)).unwrap();
        std::fs::write(&s, field_csv(&ds.snapshots, None)).unwrap();
        let back = load_dataset(&e, &s).unwrap();
        assert_eq!(back.snapshots, ds.snapshots);
    }

    #[test]
    fn fixture_matches_generator() {
        let g = us_contiguous_graph();
        assert_eq!(synthesize_field_data(&g, FIXTURE_DAYS, FIXTURE_SEED), US_SYNTHETIC_POSITIVITY);
        let ds = us_synthetic_dataset().unwrap();
        assert_eq!((ds.graph.n(), ds.snapshots.len()), (49, 250));
        assert!(ds.snapshots.iter().flat_map(|s| &s.values).all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn synth_is_seed_deterministic() {
        let g = us_contiguous_graph();
        assert_eq!(synthesize_field_data(&g, 20, 5), synthesize_field_data(&g, 20, 5));
        assert_ne!(synthesize_field_data(&g, 20, 5), synthesize_field_data(&g, 20, 6));
    }
}
