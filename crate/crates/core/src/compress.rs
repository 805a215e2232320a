//! K-sparse approximation in a basis and energy-fraction metrics.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::spectral::{by_magnitude, LaplacianBasis};

/// One network state vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub values: Vec<f64>,
    pub time_index: usize,
    pub instance_id: usize,
}

impl Snapshot {
    pub fn new(values: Vec<f64>, time_index: usize, instance_id: usize) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "snapshot (instance {instance_id}, time {time_index}) has non-finite entry at node {i}"
            )));
        }
        Ok(Snapshot {
            values,
            time_index,
            instance_id,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Least-squares refit of the retained coefficients on their support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refit {
    pub coefficients: Vec<f64>,
    pub energy_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseApprox {
    pub n: usize,
    /// `(basis index, component)` in rank order (largest magnitude first).
    pub retained: Vec<(usize, f64)>,
    pub energy_fraction: f64,
    pub refit: Option<Refit>,
}

impl SparseApprox {
    pub fn k(&self) -> usize {
        self.retained.len()
    }

    /// Dense component vector with zeros off the support.
    pub fn components(&self) -> DVector<f64> {
        let mut s = DVector::zeros(self.n);
        for &(i, c) in &self.retained {
            s[i] = c;
        }
        s
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// `1 - ‖x - x̄‖² / ‖x‖²`.
pub fn energy_fraction(x: &[f64], approx: &[f64]) -> Result<f64> {
    check_len(x.len(), approx.len())?;
    let energy: f64 = x.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::ZeroSnapshot);
    }
    let residual: f64 = x.iter().zip(approx).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - residual / energy)
}

/// Component indices ordered by descending magnitude, ties by lower index.
fn ranked(s: &DVector<f64>) -> Vec<(usize, f64)> {
    let mut pairs: Vec<(usize, f64)> = s.iter().copied().enumerate().collect();
    pairs.sort_by(by_magnitude);
    pairs
}

fn validate(basis: &LaplacianBasis, x: &[f64], k: usize) -> Result<f64> {
    check_len(basis.n(), x.len())?;
    if k == 0 || k > basis.n() {
        return Err(Error::SparsityOutOfRange { k, n: basis.n() });
    }
    let energy: f64 = x.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::ZeroSnapshot);
    }
    Ok(energy)
}

/// Keeps the `k` largest-magnitude components of `W x`.
pub fn k_sparse(basis: &LaplacianBasis, x: &[f64], k: usize) -> Result<SparseApprox> {
    k_sparse_with(basis, x, k, false)
}

/// As [`k_sparse`], optionally adding a least-squares refit over the
/// selected columns.
pub fn k_sparse_with(basis: &LaplacianBasis, x: &[f64], k: usize, refit: bool) -> Result<SparseApprox> {
    validate(basis, x, k)?;
    let s = basis.components(x)?;
    let retained: Vec<(usize, f64)> = ranked(&s).into_iter().take(k).collect();
    let mut approx = SparseApprox {
        n: basis.n(),
        retained,
        energy_fraction: 0.0,
        refit: None,
    };
    let xbar = reconstruct(basis, &approx)?;
    approx.energy_fraction = energy_fraction(x, xbar.as_slice())?;
    if refit {
        let support: Vec<usize> = approx.retained.iter().map(|r| r.0).collect();
        approx.refit = Some(least_squares_refit(basis, x, &support)?);
    }
    Ok(approx)
}

fn least_squares_refit(basis: &LaplacianBasis, x: &[f64], support: &[usize]) -> Result<Refit> {
    let n = basis.n();
    let cols = DMatrix::from_fn(n, support.len(), |r, c| basis.v()[(r, support[c])]);
    let xv = DVector::from_column_slice(x);
    let coeffs = cols
        .clone()
        .svd(true, true)
        .solve(&xv, 1e-14)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let fit = &cols * &coeffs;
    Ok(Refit {
        energy_fraction: energy_fraction(x, fit.as_slice())?,
        coefficients: coeffs.iter().copied().collect(),
    })
}

/// `V s̄` for the sparse component vector.
pub fn reconstruct(basis: &LaplacianBasis, approx: &SparseApprox) -> Result<DVector<f64>> {
    check_len(basis.n(), approx.n)?;
    let mut out = DVector::zeros(approx.n);
    for &(i, c) in &approx.retained {
        if i >= approx.n {
            return Err(Error::Dimension {
                expected: approx.n,
                got: i,
            });
        }
        out.axpy(c, &basis.v().column(i), 1.0);
    }
    Ok(out)
}

/// Entry is 1 where the value is at least 0.5.
pub fn round_to_binary(x: &[f64]) -> Vec<u8> {
    x.iter().map(|&v| u8::from(v >= 0.5)).collect()
}

pub fn match_fraction(a: &[u8], b: &[u8]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    if a.is_empty() {
        return Ok(1.0);
    }
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(agree as f64 / a.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub instance_id: usize,
    pub time_index: usize,
    pub k: usize,
    pub energy_fraction: f64,
    /// Fraction of nodes where the rounded reconstruction equals the
    /// snapshot (binary snapshots only).
    pub match_fraction: Option<f64>,
    pub refit_energy_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMean {
    pub k: usize,
    pub energy_fraction: f64,
    /// Standard error of the mean across snapshots.
    pub std_error: f64,
    pub match_fraction: Option<f64>,
    pub refit_energy_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurve {
    /// Ordered by `(instance_id, time_index, k)`.
    pub points: Vec<CurvePoint>,
    pub means: Vec<CurveMean>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CurveOptions {
    pub round: bool,
    pub refit: bool,
}

/// Energy fraction of the K-sparse approximation of every snapshot for every
/// K in `k_values` (sorted and deduplicated), plus per-K means.
pub fn energy_curve(
    basis: &LaplacianBasis,
    snapshots: &[Snapshot],
    k_values: &[usize],
) -> Result<EnergyCurve> {
    energy_curve_with(basis, snapshots, k_values, CurveOptions::default(), Execution::default())
}

pub fn energy_curve_with(
    basis: &LaplacianBasis,
    snapshots: &[Snapshot],
    k_values: &[usize],
    opts: CurveOptions,
    exec: Execution,
) -> Result<EnergyCurve> {
    if snapshots.is_empty() || k_values.is_empty() {
        return Err(Error::Config("energy curve needs snapshots and K values".into()));
    }
    let mut ks = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let n = basis.n();
    if ks[0] == 0 || ks[ks.len() - 1] > n {
        let k = if ks[0] == 0 { 0 } else { ks[ks.len() - 1] };
        return Err(Error::SparsityOutOfRange { k, n });
    }

    let per_snapshot = map_indexed(exec, snapshots.len(), |i| curve_for(basis, &snapshots[i], &ks, opts));
    let mut points = Vec::with_capacity(snapshots.len() * ks.len());
    for rows in per_snapshot {
        points.extend(rows?);
    }
    points.sort_by_key(|p| (p.instance_id, p.time_index, p.k));

    let m = snapshots.len() as f64;
    let means = ks
        .iter()
        .map(|&k| {
            let sel: Vec<&CurvePoint> = points.iter().filter(|p| p.k == k).collect();
            let mean = sel.iter().map(|p| p.energy_fraction).sum::<f64>() / m;
            let var = if sel.len() > 1 {
                sel.iter()
                    .map(|p| (p.energy_fraction - mean).powi(2))
                    .sum::<f64>()
                    / (m - 1.0)
            } else {
                0.0
            };
            let avg = |f: fn(&CurvePoint) -> Option<f64>| -> Option<f64> {
                let vals: Option<Vec<f64>> = sel.iter().map(|p| f(p)).collect();
                vals.map(|v| v.iter().sum::<f64>() / m)
            };
            CurveMean {
                k,
                energy_fraction: mean,
                std_error: (var / m).sqrt(),
                match_fraction: avg(|p| p.match_fraction),
                refit_energy_fraction: avg(|p| p.refit_energy_fraction),
            }
        })
        .collect();
    Ok(EnergyCurve { points, means })
}

fn curve_for(basis: &LaplacianBasis, snap: &Snapshot, ks: &[usize], opts: CurveOptions) -> Result<Vec<CurvePoint>> {
    let energy = validate(basis, &snap.values, ks[0])?;
    let x = DVector::from_column_slice(&snap.values);
    let order = ranked(&basis.components(&snap.values)?);
    let binary = round_to_binary(&snap.values);
    let mut residual = x.clone();
    let mut used = 0;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        while used < k {
            let (idx, c) = order[used];
            residual.axpy(-c, &basis.v().column(idx), 1.0);
            used += 1;
        }
        let match_fraction = if opts.round {
            let approx = &x - &residual;
            Some(match_fraction(&binary, &round_to_binary(approx.as_slice()))?)
        } else {
            None
        };
        let refit_energy_fraction = if opts.refit {
            let support: Vec<usize> = order[..k].iter().map(|o| o.0).collect();
            Some(least_squares_refit(basis, &snap.values, &support)?.energy_fraction)
        } else {
            None
        };
        rows.push(CurvePoint {
            instance_id: snap.instance_id,
            time_index: snap.time_index,
            k,
            energy_fraction: 1.0 - residual.norm_squared() / energy,
            match_fraction,
            refit_energy_fraction,
        });
    }
    Ok(rows)
}

impl EnergyCurve {
    /// Per-snapshot rows followed by per-K mean rows (`instance_id = -1`).
    /// Optional columns are included when the curve carries them.
    pub fn to_csv(&self) -> String {
        let with_match = self.points.iter().any(|p| p.match_fraction.is_some());
        let with_refit = self.points.iter().any(|p| p.refit_energy_fraction.is_some());
        let mut out = String::from("instance_id,K,energy_fraction");
        if with_match {
            out.push_str(",match_fraction");
        }
        if with_refit {
            out.push_str(",refit_energy_fraction");
        }
        out.push('\n');
        let extra = |out: &mut String, m: Option<f64>, r: Option<f64>| {
            if with_match {
                let _ = write!(out, ",{}", m.unwrap_or(f64::NAN));
            }
            if with_refit {
                let _ = write!(out, ",{}", r.unwrap_or(f64::NAN));
            }
            out.push('\n');
        };
        for p in &self.points {
            let _ = write!(out, "{},{},{}", p.instance_id, p.k, p.energy_fraction);
            extra(&mut out, p.match_fraction, p.refit_energy_fraction);
        }
        for m in &self.means {
            let _ = write!(out, "-1,{},{}", m.k, m.energy_fraction);
            extra(&mut out, m.match_fraction, m.refit_energy_fraction);
        }
        out
    }

    pub fn mean_at(&self, k: usize) -> Option<&CurveMean> {
        self.means.iter().find(|m| m.k == k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominantEntry {
    pub basis_index: usize,
    pub eigenvalue: f64,
    pub component: f64,
}

/// The `top` largest-magnitude components of `W x` with their eigenvalues.
pub fn dominant_basis_table(basis: &LaplacianBasis, x: &[f64], top: usize) -> Result<Vec<DominantEntry>> {
    check_len(basis.n(), x.len())?;
    if top > basis.n() {
        return Err(Error::SparsityOutOfRange { k: top, n: basis.n() });
    }
    let s = basis.components(x)?;
    Ok(ranked(&s)
        .into_iter()
        .take(top)
        .map(|(i, c)| DominantEntry {
            basis_index: i,
            eigenvalue: basis.eigenvalue(i),
            component: c,
        })
        .collect())
}

/// CSV with header `rank,basis_index,eigenvalue,component`; rank starts at 1.
pub fn dominant_csv(table: &[DominantEntry]) -> String {
    let mut out = String::from("rank,basis_index,eigenvalue,component\n");
    for (r, e) in table.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{}", r + 1, e.basis_index, e.eigenvalue, e.component);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, NetworkGraph};
    use crate::spectral::eigenbasis;

    fn path_basis(n: usize) -> LaplacianBasis {
        let pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let g = NetworkGraph::undirected(n, &pairs).unwrap();
        eigenbasis(&build_laplacian(&g)).unwrap()
    }

    fn combo(b: &LaplacianBasis, terms: &[(usize, f64)]) -> Vec<f64> {
        let mut x = DVector::zeros(b.n());
        for &(i, c) in terms {
            x.axpy(c, &b.column(i), 1.0);
        }
        x.iter().copied().collect()
    }

    #[test]
    fn energy_fraction_cases() {
        assert_eq!(energy_fraction(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(energy_fraction(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!((energy_fraction(&[3.0, 4.0], &[3.0, 0.0]).unwrap() - 0.36).abs() < 1e-15);
        assert!(matches!(energy_fraction(&[0.0, 0.0], &[0.0, 0.0]), Err(Error::ZeroSnapshot)));
        assert!(matches!(energy_fraction(&[1.0], &[0.0, 0.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn two_term_parseval() {
        let b = path_basis(6);
        let x = combo(&b, &[(0, 2.0), (1, 0.1)]);
        let a = k_sparse(&b, &x, 1).unwrap();
        assert_eq!(a.retained.len(), 1);
        assert_eq!(a.retained[0].0, 0);
        assert!((a.retained[0].1 - 2.0).abs() < 1e-12);
        assert!((a.energy_fraction - 4.0 / 4.01).abs() < 1e-12);
    }

    #[test]
    fn full_support_is_exact() {
        let b = path_basis(7);
        let x = vec![0.3, -1.2, 0.5, 2.0, 0.0, 0.7, -0.4];
        let a = k_sparse(&b, &x, 7).unwrap();
        assert!((a.energy_fraction - 1.0).abs() < 1e-10);
        let r = reconstruct(&b, &a).unwrap();
        assert!((r - DVector::from_vec(x)).amax() < 1e-8);
    }

    #[test]
    fn k_sparse_errors() {
        let b = path_basis(4);
        assert!(matches!(k_sparse(&b, &[1.0; 4], 0), Err(Error::SparsityOutOfRange { .. })));
        assert!(matches!(k_sparse(&b, &[1.0; 4], 5), Err(Error::SparsityOutOfRange { .. })));
        assert!(matches!(k_sparse(&b, &[0.0; 4], 2), Err(Error::ZeroSnapshot)));
    }

    #[test]
    fn ties_prefer_lower_index() {
        let s = DVector::from_vec(vec![0.0, 1.0, 0.5, -1.0, 1.0]);
        let idx: Vec<usize> = ranked(&s).iter().map(|r| r.0).collect();
        assert_eq!(idx, vec![1, 3, 4, 2, 0]);
    }

    #[test]
    fn refit_never_worse() {
        let l = crate::graph::LaplacianMatrix::from_matrix(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0, -1.0, 0.0, 1.0],
        ))
        .unwrap();
        let b = eigenbasis(&l).unwrap();
        assert!(!b.is_orthonormal());
        for x in [[1.0, 0.2, -0.5], [0.1, 0.9, 0.3], [-2.0, 1.0, 1.5]] {
            for k in 1..=3 {
                let a = k_sparse_with(&b, &x, k, true).unwrap();
                let refit = a.refit.unwrap();
                assert!(a.energy_fraction <= 1.0 + 1e-12);
                assert!(refit.energy_fraction >= a.energy_fraction - 1e-12);
            }
        }
    }

    #[test]
    fn reconstruct_cases() {
        let b = path_basis(4);
        let one = SparseApprox {
            n: 4,
            retained: vec![(1, 1.0)],
            energy_fraction: 0.0,
            refit: None,
        };
        assert!((reconstruct(&b, &one).unwrap() - b.column(1)).amax() < 1e-15);
        let zero = SparseApprox {
            retained: vec![(0, 0.0), (2, 0.0)],
            ..one.clone()
        };
        assert_eq!(reconstruct(&b, &zero).unwrap(), DVector::zeros(4));
        let wrong = SparseApprox { n: 3, ..one };
        assert!(reconstruct(&b, &wrong).is_err());
    }

    #[test]
    fn rounding_and_matching() {
        assert_eq!(round_to_binary(&[0.2, 0.7, 0.5]), vec![0, 1, 1]);
        assert_eq!(round_to_binary(&[0.49; 4]), vec![0; 4]);
        assert_eq!(round_to_binary(&[0.0, 1.0, 1.0]), vec![0, 1, 1]);
        assert_eq!(match_fraction(&[0, 1, 1], &[0, 1, 1]).unwrap(), 1.0);
        assert_eq!(match_fraction(&[0, 1, 1], &[1, 0, 0]).unwrap(), 0.0);
        let a = vec![1u8; 200];
        let mut b = a.clone();
        b[..23].iter_mut().for_each(|v| *v = 0);
        assert_eq!(match_fraction(&a, &b).unwrap(), 0.885);
        assert!(match_fraction(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn curve_cases() {
        let b = path_basis(5);
        let s = Snapshot::new(vec![0.1, 0.4, -0.3, 0.8, 0.2], 3, 0).unwrap();
        let c = energy_curve(&b, std::slice::from_ref(&s), &[5]).unwrap();
        assert!((c.points[0].energy_fraction - 1.0).abs() < 1e-12);
        assert!((c.means[0].energy_fraction - 1.0).abs() < 1e-12);

        let basis_vec = Snapshot::new(combo(&b, &[(2, 1.5)]), 0, 1).unwrap();
        let c = energy_curve(&b, &[basis_vec], &[1, 2, 3]).unwrap();
        assert!(c.points.iter().all(|p| (p.energy_fraction - 1.0).abs() < 1e-12));

        assert!(energy_curve(&b, &[], &[1]).is_err());
        assert!(energy_curve(&b, std::slice::from_ref(&s), &[6]).is_err());
    }

    #[test]
    fn curve_matches_k_sparse() {
        let b = path_basis(6);
        let snaps: Vec<Snapshot> = (0..3)
            .map(|i| Snapshot::new((0..6).map(|j| ((i * 7 + j * 3) % 5) as f64 - 2.0).collect(), 0, i).unwrap())
            .collect();
        let c = energy_curve_with(&b, &snaps, &[3, 1, 2, 3], CurveOptions { round: true, refit: true }, Execution::Sequential)
            .unwrap();
        assert_eq!(c.points.len(), 9);
        for p in &c.points {
            let direct = k_sparse(&b, &snaps[p.instance_id].values, p.k).unwrap();
            assert!((direct.energy_fraction - p.energy_fraction).abs() < 1e-12);
            assert!(p.match_fraction.is_some());
        }
        let csv = c.to_csv();
        assert!(csv.starts_with("instance_id,K,energy_fraction,match_fraction,refit_energy_fraction\n"));
        assert_eq!(csv.lines().filter(|l| l.starts_with("-1,")).count(), 3);
    }

    #[test]
    fn dominant_table() {
        let b = path_basis(6);
        let t = dominant_basis_table(&b, &combo(&b, &[(0, 1.0)]), 1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].basis_index, 0);
        assert!(t[0].eigenvalue.abs() < 1e-12);
        assert!((t[0].component - 1.0).abs() < 1e-12);

        let t = dominant_basis_table(&b, &combo(&b, &[(4, 3.0), (1, 1.0)]), 2).unwrap();
        assert_eq!((t[0].basis_index, t[1].basis_index), (4, 1));
        assert!((t[0].eigenvalue - b.eigenvalue(4)).abs() < 1e-15);
        assert!((t[0].component - 3.0).abs() < 1e-12);
        assert!(dominant_basis_table(&b, &[1.0; 6], 7).is_err());
        assert!(dominant_csv(&t).starts_with("rank,basis_index,eigenvalue,component\n1,4,"));
    }
}
