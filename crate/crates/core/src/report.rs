//! Plot-ready tables, JSON reports and the output-directory writer.
//!
//! Nothing here computes new quantities; every number comes from the
//! analysis modules and is only formatted.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compress::{energy_curve_with, CurveOptions, DominantEntry, EnergyCurve, Snapshot};
use crate::ensemble_stats::{DecayProfile, EnsembleStats, MomentForm};
use crate::error::{Error, Result};
use crate::graph::NetworkGraph;
use crate::ingest::FieldDataset;
use crate::par::Execution;
use crate::spectral::{Eigenvalue, LaplacianBasis};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "lapcompress";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Overlay entries at or beyond this fraction of `max|entry|` are classed
/// strongly positive or negative.
pub const OVERLAY_THRESHOLD: f64 = 0.5;

/// Dense matrix as CSV: header `row_label,prefix_0,...`, one row per matrix
/// row prefixed by its index.
pub fn matrix_csv(m: &DMatrix<f64>, row_label: &str, col_prefix: &str) -> String {
    let mut out = String::from(row_label);
    for j in 0..m.ncols() {
        let _ = write!(out, ",{col_prefix}_{j}");
    }
    out.push('\n');
    for i in 0..m.nrows() {
        let _ = write!(out, "{i}");
        for j in 0..m.ncols() {
            let _ = write!(out, ",{}", m[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// Where a set of outputs came from: the command, its seed and parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub params: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        Provenance {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            seed: None,
            params: BTreeMap::new(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSummary {
    pub n: usize,
    pub orthonormal: bool,
    pub eigenvalues: Vec<Eigenvalue>,
}

impl BasisSummary {
    pub fn of(basis: &LaplacianBasis) -> Self {
        BasisSummary {
            n: basis.n(),
            orthonormal: basis.is_orthonormal(),
            eigenvalues: basis.eigenvalues().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantTable {
    pub instance_id: usize,
    pub time_index: usize,
    pub entries: Vec<DominantEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressReport {
    pub schema_version: u32,
    pub label: String,
    pub basis: BasisSummary,
    pub k_values: Vec<usize>,
    pub curve: EnergyCurve,
    pub dominant: Vec<DominantTable>,
    pub provenance: Provenance,
}

impl CompressReport {
    pub fn new(label: &str, basis: &LaplacianBasis, curve: EnergyCurve, provenance: Provenance) -> Self {
        let k_values = curve.means.iter().map(|m| m.k).collect();
        CompressReport {
            schema_version: SCHEMA_VERSION,
            label: label.into(),
            basis: BasisSummary::of(basis),
            k_values,
            curve,
            dominant: Vec::new(),
            provenance,
        }
    }

    /// Basis indices in range and energy fractions at most 1.
    pub fn validate(&self) -> Result<()> {
        let n = self.basis.n;
        for t in &self.dominant {
            if let Some(e) = t.entries.iter().find(|e| e.basis_index >= n) {
                return Err(Error::Config(format!("basis index {} out of range 0..{n}", e.basis_index)));
            }
        }
        let over = self
            .curve
            .points
            .iter()
            .map(|p| p.energy_fraction)
            .chain(self.curve.means.iter().map(|m| m.energy_fraction))
            .find(|&f| f > 1.0 + 1e-12);
        if let Some(f) = over {
            return Err(Error::Config(format!("energy fraction {f} exceeds 1")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Energy curves of an ensemble as two tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure2Data {
    pub curve: EnergyCurve,
    /// `instance_id,time_index,K,energy_fraction`.
    pub per_instance_csv: String,
    /// `K,mean_energy_fraction,std_error`.
    pub mean_csv: String,
}

pub fn figure2_data(
    snapshots: &[Snapshot],
    basis: &LaplacianBasis,
    k_values: &[usize],
    exec: Execution,
) -> Result<Figure2Data> {
    let curve = energy_curve_with(basis, snapshots, k_values, CurveOptions::default(), exec)?;
    let mut per_instance_csv = String::from("instance_id,time_index,K,energy_fraction\n");
    for p in &curve.points {
        let _ = writeln!(per_instance_csv, "{},{},{},{}", p.instance_id, p.time_index, p.k, p.energy_fraction);
    }
    let mut mean_csv = String::from("K,mean_energy_fraction,std_error\n");
    for m in &curve.means {
        let _ = writeln!(mean_csv, "{},{},{}", m.k, m.energy_fraction, m.std_error);
    }
    Ok(Figure2Data {
        curve,
        per_instance_csv,
        mean_csv,
    })
}

/// Per-day energy fractions of a field dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure5Data {
    pub curve: EnergyCurve,
    /// Wide table: `day,K_<k1>,K_<k2>,...`.
    pub csv: String,
}

pub fn figure5_data(
    dataset: &FieldDataset,
    basis: &LaplacianBasis,
    k_values: &[usize],
    exec: Execution,
) -> Result<Figure5Data> {
    let curve = energy_curve_with(basis, &dataset.snapshots, k_values, CurveOptions::default(), exec)?;
    let ks: Vec<usize> = curve.means.iter().map(|m| m.k).collect();
    let mut csv = String::from("day");
    for k in &ks {
        let _ = write!(csv, ",K_{k}");
    }
    csv.push('\n');
    for day in curve.points.chunks(ks.len()) {
        let _ = write!(csv, "{}", day[0].time_index);
        for p in day {
            let _ = write!(csv, ",{}", p.energy_fraction);
        }
        csv.push('\n');
    }
    Ok(Figure5Data { curve, csv })
}

/// Basis vector `index` laid over node coordinates:
/// `node,label,x,y,entry,class` with class `positive`, `negative` or
/// `neutral`.
pub fn eigenvector_overlay(
    basis: &LaplacianBasis,
    index: usize,
    graph: &NetworkGraph,
    coords: Option<&[[f64; 2]]>,
) -> Result<String> {
    let n = basis.n();
    let coords = coords.ok_or_else(|| Error::Config("eigenvector overlay needs node coordinates".into()))?;
    if coords.len() != n || graph.n() != n {
        return Err(Error::Dimension {
            expected: n,
            got: if coords.len() != n { coords.len() } else { graph.n() },
        });
    }
    if index >= n {
        return Err(Error::Config(format!("basis index {index} out of range 0..{n}")));
    }
    let v = basis.column(index);
    let cut = OVERLAY_THRESHOLD * v.amax();
    let mut out = String::from("node,label,x,y,entry,class\n");
    for i in 0..n {
        let class = if v[i] >= cut && cut > 0.0 {
            "positive"
        } else if v[i] <= -cut && cut > 0.0 {
            "negative"
        } else {
            "neutral"
        };
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{class}",
            graph.label(i),
            coords[i][0],
            coords[i][1],
            v[i]
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteningReport {
    pub schema_version: u32,
    pub k: usize,
    pub z: usize,
    pub form: MomentForm,
    pub components_for_89pct: usize,
    pub components_for_99pct: usize,
    pub components_for_99_9pct: usize,
    pub variances: Vec<f64>,
    pub decay_ratios: Vec<f64>,
    pub provenance: Provenance,
}

impl WhiteningReport {
    pub fn new(stats: &EnsembleStats, d: &[f64], profile: &DecayProfile, provenance: Provenance) -> Self {
        let count = |f: f64| profile.components_for(f).unwrap_or(d.len());
        WhiteningReport {
            schema_version: SCHEMA_VERSION,
            k: stats.k,
            z: stats.z,
            form: stats.form,
            components_for_89pct: count(0.89),
            components_for_99pct: count(0.99),
            components_for_99_9pct: count(0.999),
            variances: d.to_vec(),
            decay_ratios: profile.ratios.clone(),
            provenance,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub files: Vec<ManifestEntry>,
}

/// Writes files atomically under one directory and records them for
/// `manifest.json`.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(OutputDir {
            root,
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `rel` (relative to the root) via a temp file and rename.
    pub fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let bytes = contents.as_ref();
        let path = self.root.join(rel);
        write_atomic(&path, bytes)?;
        let digest = Sha256::digest(bytes);
        let sha256 = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        self.files.retain(|f| f.path != rel);
        self.files.push(ManifestEntry {
            path: rel.into(),
            bytes: bytes.len() as u64,
            sha256,
        });
        Ok(path)
    }

    pub fn files(&self) -> &[ManifestEntry] {
        &self.files
    }

    /// Writes `manifest.json` with files sorted by path.
    pub fn finish(mut self, provenance: Provenance) -> Result<Manifest> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            provenance,
            files: self.files,
        };
        let json = serde_json::to_string_pretty(&manifest)? + "\n";
        write_atomic(&self.root.join("manifest.json"), json.as_bytes())?;
        Ok(manifest)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
