//! Laplacian-eigenvector basis.
//!
//! Columns of `V` are unit-norm right eigenvectors of `L` ordered by
//! ascending eigenvalue real part. A complex-conjugate eigenpair is replaced
//! by two real columns: the real part and the imaginary part of the
//! eigenvector, after rotating its complex phase so that the two parts are
//! orthogonal and the real part is the longer one. Every column is signed so
//! that its largest-magnitude entry is positive. `W = V⁻¹` is obtained by
//! direct inversion.

use std::cmp::Ordering;
use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;

/// Above this condition estimate `V` is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Laplacians symmetric within this relative tolerance use the symmetric
/// solver and yield an orthonormal basis.
pub const SYMMETRY_TOL: f64 = 1e-12;

const CLUSTER_TOL: f64 = 1e-6;
/// QR iterations can stall at machine-epsilon deflation on some graphs, so
/// the deflation tolerance is relaxed step by step.
const SCHUR_TOLERANCES: [f64; 4] = [f64::EPSILON, 1e-15, 1e-14, 1e-13];
const SCHUR_MAX_ITER: usize = 100_000;
const PARALLEL_TOL: f64 = 1e-6;

/// Role of a column in the realified basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairFlag {
    Real,
    /// Real part of a complex eigenvector; the next column is its partner.
    PairReal,
    /// Imaginary part of a complex eigenvector; the previous column is its
    /// partner.
    PairImag,
}

impl PairFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            PairFlag::Real => "real",
            PairFlag::PairReal => "pair-real",
            PairFlag::PairImag => "pair-imag",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    /// Zero for real eigenvalues; `+|b|` on the real-part column of a pair
    /// and `-|b|` on the imaginary-part column.
    pub im: f64,
    pub flag: PairFlag,
}

impl Eigenvalue {
    pub fn is_real(&self) -> bool {
        self.flag == PairFlag::Real
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianBasis {
    eigenvalues: Vec<Eigenvalue>,
    v: DMatrix<f64>,
    w: DMatrix<f64>,
    orthonormal: bool,
}

impl LaplacianBasis {
    /// Builds a basis from explicit columns. `V` must be invertible; columns
    /// are normalised but not re-signed or reordered.
    pub fn from_parts(eigenvalues: Vec<Eigenvalue>, mut v: DMatrix<f64>, orthonormal: bool) -> Result<Self> {
        let n = v.nrows();
        if v.ncols() != n || eigenvalues.len() != n || n == 0 {
            return Err(Error::Dimension {
                expected: n,
                got: eigenvalues.len(),
            });
        }
        for mut col in v.column_iter_mut() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::IllConditioned {
                    condition: f64::INFINITY,
                });
            }
            col /= norm;
        }
        let w = invert(&v)?;
        Ok(LaplacianBasis {
            eigenvalues,
            v,
            w,
            orthonormal,
        })
    }

    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    pub fn eigenvalues(&self) -> &[Eigenvalue] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, index: usize) -> f64 {
        self.eigenvalues[index].re
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    pub fn column(&self, index: usize) -> DVector<f64> {
        self.v.column(index).into_owned()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: len,
            });
        }
        Ok(())
    }

    /// Basis components `s = W x`.
    pub fn components(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        Ok(&self.w * DVector::from_column_slice(x))
    }

    /// `V s`.
    pub fn synthesize(&self, s: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(s.len())?;
        Ok(&self.v * s)
    }

    /// CSV with header `index,eigenvalue_real,eigenvalue_imag,pair_flag`.
    pub fn eigenvalues_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue_real,eigenvalue_imag,pair_flag\n");
        for (i, e) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "{i},{},{},{}", e.re, e.im, e.flag.as_str());
        }
        out
    }

    /// Dense CSV of `V`: one row per node, one column per basis vector.
    pub fn vectors_csv(&self) -> String {
        crate::report::matrix_csv(&self.v, "node", "v")
    }
}

fn invert(v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sv = v.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    v.clone()
        .try_inverse()
        .ok_or(Error::IllConditioned { condition })
}

/// Computes the Laplacian-eigenvector basis of `l`.
pub fn eigenbasis(l: &LaplacianMatrix) -> Result<LaplacianBasis> {
    if l.is_symmetric(SYMMETRY_TOL) {
        symmetric_basis(l.matrix())
    } else {
        general_basis(l.matrix())
    }
}

fn symmetric_basis(m: &DMatrix<f64>) -> Result<LaplacianBasis> {
    let n = m.nrows();
    // Exact symmetrisation so the solver sees a symmetric input.
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut v = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        let mut c = eig.eigenvectors.column(src).into_owned();
        c /= c.norm();
        fix_sign(&mut c);
        v.set_column(col, &c);
        eigenvalues.push(Eigenvalue {
            re: eig.eigenvalues[src],
            im: 0.0,
            flag: PairFlag::Real,
        });
    }
    let w = invert(&v)?;
    Ok(LaplacianBasis {
        eigenvalues,
        v,
        w,
        orthonormal: true,
    })
}

/// One eigenvalue (with nonnegative imaginary part) and its eigenvector.
struct EigenItem {
    value: Complex<f64>,
    vector: Vec<Complex<f64>>,
    solver_order: usize,
}

fn general_basis(m: &DMatrix<f64>) -> Result<LaplacianBasis> {
    let n = m.nrows();
    let schur = SCHUR_TOLERANCES
        .iter()
        .find_map(|&eps| Schur::try_new(m.clone(), eps, SCHUR_MAX_ITER))
        .ok_or(Error::NoConvergence)?;
    let (q, t) = schur.unpack();
    let mut items = schur_eigenvectors(&t);
    for item in &mut items {
        item.vector = mul_real_complex(&q, &item.vector);
    }
    items.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.abs().total_cmp(&b.value.im.abs()))
            .then(a.solver_order.cmp(&b.solver_order))
    });

    let mut v = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut col = 0;
    for item in &items {
        if item.value.im == 0.0 {
            let mut c = DVector::from_iterator(n, item.vector.iter().map(|z| z.re));
            c /= c.norm();
            fix_sign(&mut c);
            v.set_column(col, &c);
            eigenvalues.push(Eigenvalue {
                re: item.value.re,
                im: 0.0,
                flag: PairFlag::Real,
            });
            col += 1;
        } else {
            let (mut re, mut im) = realify(&item.vector);
            fix_sign(&mut re);
            fix_sign(&mut im);
            v.set_column(col, &re);
            v.set_column(col + 1, &im);
            let b = item.value.im.abs();
            eigenvalues.push(Eigenvalue {
                re: item.value.re,
                im: b,
                flag: PairFlag::PairReal,
            });
            eigenvalues.push(Eigenvalue {
                re: item.value.re,
                im: -b,
                flag: PairFlag::PairImag,
            });
            col += 2;
        }
    }
    debug_assert_eq!(col, n);
    reject_defective_clusters(&eigenvalues, &v, m.amax())?;
    let w = invert(&v)?;
    Ok(LaplacianBasis {
        eigenvalues,
        v,
        w,
        orthonormal: false,
    })
}

/// A defective eigenvalue shows up as a cluster of nearly equal computed
/// eigenvalues whose eigenvectors are nearly parallel; the overall condition
/// number of `V` can stay moderate in that case.
fn reject_defective_clusters(eigenvalues: &[Eigenvalue], v: &DMatrix<f64>, scale: f64) -> Result<()> {
    let tol = CLUSTER_TOL * scale.max(1.0);
    let n = eigenvalues.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && (eigenvalues[end].re - eigenvalues[end - 1].re).abs() <= tol
            && (eigenvalues[end].im.abs() - eigenvalues[end - 1].im.abs()).abs() <= tol
        {
            end += 1;
        }
        let len = end - start;
        let pair_only = len == 2 && eigenvalues[start].flag == PairFlag::PairReal;
        if len > 1 && !pair_only {
            let block = v.columns(start, len).into_owned();
            let sv = block.singular_values();
            let smin = sv.min();
            if smin < PARALLEL_TOL {
                return Err(Error::IllConditioned {
                    condition: sv.max() / smin.max(f64::MIN_POSITIVE),
                });
            }
        }
        start = end;
    }
    Ok(())
}

fn mul_real_complex(q: &DMatrix<f64>, y: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let n = q.nrows();
    let mut out = vec![Complex::new(0.0, 0.0); n];
    for (j, yj) in y.iter().enumerate() {
        if yj.re == 0.0 && yj.im == 0.0 {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += *yj * q[(i, j)];
        }
    }
    out
}

/// Diagonal blocks of a real quasi-upper-triangular matrix as `(start, size)`.
fn schur_blocks(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}

fn block_eigenvalues(t: &DMatrix<f64>, start: usize, size: usize) -> Vec<Complex<f64>> {
    if size == 1 {
        return vec![Complex::new(t[(start, start)], 0.0)];
    }
    let (a, b) = (t[(start, start)], t[(start, start + 1)]);
    let (c, d) = (t[(start + 1, start)], t[(start + 1, start + 1)]);
    let mid = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        let r = disc.sqrt();
        vec![Complex::new(mid - r, 0.0), Complex::new(mid + r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        vec![Complex::new(mid, r), Complex::new(mid, -r)]
    }
}

/// Eigenvectors of a quasi-triangular `t` by back substitution. Only one
/// member of each conjugate pair (positive imaginary part) is returned.
fn schur_eigenvectors(t: &DMatrix<f64>) -> Vec<EigenItem> {
    let n = t.nrows();
    let small = f64::EPSILON * t.amax().max(f64::MIN_POSITIVE);
    let blocks = schur_blocks(t);
    let zero = Complex::new(0.0, 0.0);
    let mut items = Vec::with_capacity(n);
    let mut solver_order = 0;

    for (bi, &(start, size)) in blocks.iter().enumerate() {
        for mu in block_eigenvalues(t, start, size) {
            let order = solver_order;
            solver_order += 1;
            if mu.im < 0.0 {
                continue;
            }
            let mut y = vec![zero; n];
            if size == 1 {
                y[start] = Complex::new(1.0, 0.0);
            } else {
                let m00 = Complex::new(t[(start, start)], 0.0) - mu;
                let m01 = Complex::new(t[(start, start + 1)], 0.0);
                let m10 = Complex::new(t[(start + 1, start)], 0.0);
                let m11 = Complex::new(t[(start + 1, start + 1)], 0.0) - mu;
                let (y0, y1) = if m00.norm() + m01.norm() >= m10.norm() + m11.norm() {
                    (m01, -m00)
                } else {
                    (m11, -m10)
                };
                if y0.norm() + y1.norm() == 0.0 {
                    y[start] = Complex::new(1.0, 0.0);
                } else {
                    y[start] = y0;
                    y[start + 1] = y1;
                }
            }
            let end = start + size;
            for &(cs, csz) in blocks[..bi].iter().rev() {
                let ce = cs + csz;
                let rhs: Vec<Complex<f64>> = (cs..ce)
                    .map(|r| {
                        let mut acc = zero;
                        for (m, ym) in y.iter().enumerate().take(end).skip(ce) {
                            acc += *ym * t[(r, m)];
                        }
                        -acc
                    })
                    .collect();
                if csz == 1 {
                    let mut d = Complex::new(t[(cs, cs)], 0.0) - mu;
                    if d.norm() < small {
                        d = Complex::new(small, 0.0);
                    }
                    y[cs] = rhs[0] / d;
                } else {
                    let a = Complex::new(t[(cs, cs)], 0.0) - mu;
                    let b = Complex::new(t[(cs, cs + 1)], 0.0);
                    let c = Complex::new(t[(cs + 1, cs)], 0.0);
                    let d = Complex::new(t[(cs + 1, cs + 1)], 0.0) - mu;
                    let mut det = a * d - b * c;
                    if det.norm() < small * small.max(1.0) {
                        det = Complex::new(small, 0.0);
                    }
                    y[cs] = (d * rhs[0] - b * rhs[1]) / det;
                    y[cs + 1] = (a * rhs[1] - c * rhs[0]) / det;
                }
                let scale = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if scale > 1e100 {
                    y.iter_mut().for_each(|z| *z /= scale);
                }
            }
            items.push(EigenItem {
                value: mu,
                vector: y,
                solver_order: order,
            });
        }
    }
    items
}

/// Real and imaginary parts of `e^{iθ} z`, with θ chosen to make them
/// orthogonal and the real part longest; both are normalised.
fn realify(z: &[Complex<f64>]) -> (DVector<f64>, DVector<f64>) {
    let n = z.len();
    let a = DVector::from_iterator(n, z.iter().map(|c| c.re));
    let b = DVector::from_iterator(n, z.iter().map(|c| c.im));
    let theta = 0.5 * (-2.0 * a.dot(&b)).atan2(a.dot(&a) - b.dot(&b));
    let (s, c) = theta.sin_cos();
    let mut re = &a * c - &b * s;
    let mut im = &a * s + &b * c;
    re /= re.norm();
    im /= im.norm();
    (re, im)
}

/// Makes the largest-magnitude entry positive; among entries whose
/// magnitudes agree to rounding, the lowest index decides.
pub(crate) fn fix_sign(c: &mut DVector<f64>) {
    let max = c.amax();
    if max == 0.0 {
        return;
    }
    let tol = max * 1e-12;
    let pivot = c
        .iter()
        .position(|v| (v.abs() - max).abs() <= tol)
        .unwrap_or(0);
    if c[pivot] < 0.0 {
        c.neg_mut();
    }
}

/// Orders `(index, value)` pairs by descending magnitude, lower index first
/// on ties.
pub(crate) fn by_magnitude(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, Edge, NetworkGraph};

    fn lap(n: usize, edges: &[(usize, usize, f64)]) -> LaplacianMatrix {
        let g = NetworkGraph::new(n, edges.iter().map(|&(s, d, w)| Edge::new(s, d, w)).collect()).unwrap();
        build_laplacian(&g)
    }

    fn check_invariants(l: &LaplacianMatrix, b: &LaplacianBasis) {
        let n = b.n();
        for c in b.v().column_iter() {
            assert!((c.norm() - 1.0).abs() <= 1e-10);
        }
        let vw = b.v() * b.w() - DMatrix::<f64>::identity(n, n);
        assert!(vw.amax() <= 1e-8, "V W - I = {}", vw.amax());
        assert!(b.eigenvalues()[0].re.abs() <= 1e-8);
        for pair in b.eigenvalues().windows(2) {
            assert!(pair[0].re <= pair[1].re);
        }
        for (i, e) in b.eigenvalues().iter().enumerate() {
            assert!(e.re >= -1e-8);
            if e.is_real() {
                let v = b.column(i);
                let r = l.matrix() * &v - &v * e.re;
                assert!(r.norm() <= 1e-7, "residual {} at {i}", r.norm());
            }
        }
        if b.is_orthonormal() {
            let g = b.v().transpose() * b.v() - DMatrix::<f64>::identity(n, n);
            assert!(g.amax() <= 1e-8);
        }
    }

    #[test]
    fn two_node_symmetric() {
        let l = lap(2, &[(0, 1, 0.5), (1, 0, 0.5)]);
        let b = eigenbasis(&l).unwrap();
        check_invariants(&l, &b);
        assert!(b.is_orthonormal());
        assert!(b.eigenvalue(0).abs() < 1e-14);
        assert!((b.eigenvalue(1) - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b.column(0) - DVector::from_vec(vec![h, h])).amax() < 1e-14);
        assert!((b.column(1) - DVector::from_vec(vec![h, -h])).amax() < 1e-14);
    }

    #[test]
    fn single_node() {
        let l = lap(1, &[]);
        let b = eigenbasis(&l).unwrap();
        assert_eq!(b.v()[(0, 0)], 1.0);
        assert_eq!(b.w()[(0, 0)], 1.0);
        assert_eq!(b.eigenvalue(0), 0.0);
    }

    #[test]
    fn directed_cycle_has_realified_pair() {
        // Characteristic polynomial of I - P for the 3-cycle shift P is
        // (1 - mu)^3 - 1; its roots are computed independently below.
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]);
        let b = eigenbasis(&l).unwrap();
        check_invariants(&l, &b);
        assert!(!b.is_orthonormal());
        let roots: Vec<Complex<f64>> = (0..3)
            .map(|k| {
                let ang = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                Complex::new(1.0, 0.0) - Complex::new(ang.cos(), ang.sin())
            })
            .collect();
        for r in &roots {
            let p = (Complex::new(1.0, 0.0) - r).powu(3) - 1.0;
            assert!(p.norm() < 1e-12);
        }
        let e = b.eigenvalues();
        assert_eq!(e[0].flag, PairFlag::Real);
        assert!(e[0].re.abs() < 1e-12);
        assert_eq!(e[1].flag, PairFlag::PairReal);
        assert_eq!(e[2].flag, PairFlag::PairImag);
        assert!((e[1].re - roots[1].re).abs() < 1e-12);
        assert!((e[1].im - roots[1].im.abs()).abs() < 1e-12);
        assert!((e[2].im + roots[1].im.abs()).abs() < 1e-12);
        // The pair columns span the invariant subspace: L maps it into itself.
        let pair = b.v().columns(1, 2).into_owned();
        let image = l.matrix() * &pair;
        let coeffs = b.w() * &image;
        assert!(coeffs.row(0).amax() < 1e-10);
    }

    #[test]
    fn sign_convention() {
        let l = lap(4, &[(0, 1, 0.3), (1, 0, 0.3), (1, 2, 0.2), (2, 1, 0.2), (2, 3, 0.4), (3, 2, 0.4)]);
        let b = eigenbasis(&l).unwrap();
        for c in b.v().column_iter() {
            let max = c.amax();
            let first = c.iter().find(|v| (v.abs() - max).abs() <= 1e-12 * max).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn defective_laplacian_rejected() {
        // Chain 0 -> 1 -> 2 with equal weights: eigenvalue 1 has a Jordan block.
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert!(matches!(eigenbasis(&l), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn directed_chain_with_distinct_weights() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 2.0)]);
        let b = eigenbasis(&l).unwrap();
        check_invariants(&l, &b);
        let vals: Vec<f64> = b.eigenvalues().iter().map(|e| e.re).collect();
        assert!((vals[1] - 1.0).abs() < 1e-12 && (vals[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn components_of_basis_vectors() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]);
        let b = eigenbasis(&l).unwrap();
        let x: Vec<f64> = b.column(2).iter().copied().collect();
        let s = b.components(&x).unwrap();
        let mut e3 = DVector::zeros(3);
        e3[2] = 1.0;
        assert!((s - e3).amax() < 1e-10);
        assert_eq!(b.components(&[0.0; 3]).unwrap(), DVector::zeros(3));
        assert!(matches!(b.components(&[1.0; 2]), Err(Error::Dimension { expected: 3, got: 2 })));
    }

    #[test]
    fn eigenvalue_csv_layout() {
        let l = lap(2, &[(0, 1, 0.5), (1, 0, 0.5)]);
        let csv = eigenbasis(&l).unwrap().eigenvalues_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("index,eigenvalue_real,eigenvalue_imag,pair_flag"));
        assert!(lines.next().unwrap().ends_with(",0,real"));
    }
}
