//! Closed-form second moments of the consensus model in the
//! Laplacian-eigenvector basis, and the whitening basis built from them.
//!
//! With `s[k] = W x[k]` and `h = W B` (so `h_i = w_iz`), the components obey
//! `s[k+1] = Λ s[k] + h u[k]` with `Λ = diag(1 - λ_i)`, hence
//! `E[s sᵀ] = Q C Q`, `Q = diag(h)`, `c_ij = Σ_{l<k} ((1-λ_i)(1-λ_j))^l`.
//! The asymptotic form keeps `c_11 = k` and replaces the other geometric
//! sums by their limits.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{fix_sign, LaplacianBasis, PairFlag};

/// Whitening variances below this fraction of the largest are set to zero.
pub const VARIANCE_FLOOR: f64 = 1e-14;

/// Cumulative variance fractions reported by [`variance_decay_profile`].
pub const REPORTED_FRACTIONS: [f64; 3] = [0.89, 0.99, 0.999];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentForm {
    /// `c_11 = k`, `c_1j = 1/λ_j`, `c_ij = 1/(1 - (1-λ_i)(1-λ_j))`.
    #[default]
    Asymptotic,
    /// Finite geometric sums up to time `k`.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub k: usize,
    pub z: usize,
    pub form: MomentForm,
    /// Diagonal of `Q`: column `z` of `W`.
    pub q: DVector<f64>,
    pub c: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
}

fn check_regime(basis: &LaplacianBasis) -> Result<Vec<f64>> {
    let ev = basis.eigenvalues();
    if ev.iter().any(|e| e.flag != PairFlag::Real) {
        return Err(Error::OutsideTheoremRegime("complex eigenvalues".into()));
    }
    let lambda: Vec<f64> = ev.iter().map(|e| e.re).collect();
    if lambda[0].abs() > 1e-8 {
        return Err(Error::OutsideTheoremRegime(format!(
            "smallest eigenvalue {} is not zero",
            lambda[0]
        )));
    }
    if let Some(i) = lambda.windows(2).position(|w| w[1] - w[0] <= 1e-10) {
        return Err(Error::OutsideTheoremRegime(format!(
            "repeated eigenvalue {} at positions {i} and {}",
            lambda[i],
            i + 1
        )));
    }
    let top = lambda[lambda.len() - 1];
    if top >= 2.0 {
        return Err(Error::OutsideTheoremRegime(format!("eigenvalue {top} is not below 2")));
    }
    Ok(lambda)
}

pub fn theorem1_sigma(basis: &LaplacianBasis, z: usize, k: usize) -> Result<EnsembleStats> {
    theorem1_sigma_with(basis, z, k, MomentForm::Asymptotic)
}

pub fn theorem1_sigma_with(basis: &LaplacianBasis, z: usize, k: usize, form: MomentForm) -> Result<EnsembleStats> {
    let n = basis.n();
    if z >= n {
        return Err(Error::Config(format!("input node {z} out of range 0..{n}")));
    }
    if k == 0 {
        return Err(Error::Config("time index k must be positive".into()));
    }
    let lambda = check_regime(basis)?;
    let q = basis.w().column(z).into_owned();
    let kf = k as f64;
    // Mode multipliers of A = I - L; the consensus mode is exactly 1.
    let mu: Vec<f64> = lambda
        .iter()
        .enumerate()
        .map(|(i, l)| if i == 0 { 1.0 } else { 1.0 - l })
        .collect();
    let c = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 && j == 0 {
            return kf;
        }
        let p = mu[i] * mu[j];
        let denom = 1.0 - p;
        match form {
            MomentForm::Asymptotic => 1.0 / denom,
            MomentForm::Exact => (1.0 - p.powi(k as i32)) / denom,
        }
    });
    let sigma = DMatrix::from_fn(n, n, |i, j| q[i] * c[(i, j)] * q[j]);
    Ok(EnsembleStats {
        k,
        z,
        form,
        q,
        c,
        sigma,
    })
}

/// Sum of the `k_sparse` largest diagonal entries of Σ (ties by lower
/// index). For an orthonormal basis this bounds the expected energy of the
/// optimal K-sparse approximation from below.
pub fn corollary_lower_bound(stats: &EnsembleStats, k_sparse: usize) -> Result<f64> {
    let n = stats.sigma.nrows();
    if k_sparse == 0 || k_sparse > n {
        return Err(Error::SparsityOutOfRange { k: k_sparse, n });
    }
    let mut diag: Vec<(usize, f64)> = stats.sigma.diagonal().iter().copied().enumerate().collect();
    diag.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(diag[..k_sparse].iter().map(|d| d.1).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningBasis {
    /// Columns are the whitening basis vectors, `Φ = V V*`.
    pub phi: DMatrix<f64>,
    /// `Φ⁻¹ = V*ᵀ W`.
    pub phi_inv: DMatrix<f64>,
    /// Component variances, descending, floored at zero.
    pub d: Vec<f64>,
    /// Orthonormal eigenvectors of Σ, ordered like `d`.
    pub v_star: DMatrix<f64>,
}

impl WhiteningBasis {
    /// `r = Φ⁻¹ x`.
    pub fn components(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.phi.nrows() {
            return Err(Error::Dimension {
                expected: self.phi.nrows(),
                got: x.len(),
            });
        }
        Ok(&self.phi_inv * DVector::from_column_slice(x))
    }
}

/// Eigendecomposes Σ and composes the whitening basis `Φ = V V*`, so that a
/// model state `x = V s` has components `r = V*ᵀ s` with covariance `D`.
pub fn whitening_basis(basis: &LaplacianBasis, stats: &EnsembleStats) -> Result<WhiteningBasis> {
    let n = basis.n();
    let sigma = &stats.sigma;
    if sigma.nrows() != n {
        return Err(Error::Dimension {
            expected: n,
            got: sigma.nrows(),
        });
    }
    let scale = sigma.amax().max(f64::MIN_POSITIVE);
    let asym = (sigma - sigma.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::Config(format!(
            "cannot whiten a non-symmetric second moment (asymmetry {asym:e})"
        )));
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let dmax = eig.eigenvalues[order[0]].max(0.0);
    let mut v_star = DMatrix::zeros(n, n);
    let mut d = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        v_star.set_column(col, &eig.eigenvectors.column(src));
        let val = eig.eigenvalues[src];
        d.push(if val < VARIANCE_FLOOR * dmax { 0.0 } else { val });
    }
    let mut phi = basis.v() * &v_star;
    for j in 0..n {
        let mut col = phi.column(j).into_owned();
        let before = col[col.iamax()];
        fix_sign(&mut col);
        if col[col.iamax()] != before {
            phi.set_column(j, &col);
            v_star.column_mut(j).neg_mut();
        }
    }
    let phi_inv = v_star.transpose() * basis.w();
    Ok(WhiteningBasis {
        phi,
        phi_inv,
        d,
        v_star,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// `D[i+1] / D[i]` over the variances above the floor.
    pub ratios: Vec<f64>,
    /// `(fraction, components)`: fewest leading components whose variance
    /// reaches each fraction of the total.
    pub components_for: Vec<(f64, usize)>,
}

impl DecayProfile {
    pub fn components_for(&self, fraction: f64) -> Option<usize> {
        self.components_for
            .iter()
            .find(|(f, _)| *f == fraction)
            .map(|&(_, c)| c)
    }
}

pub fn variance_decay_profile(wb: &WhiteningBasis) -> DecayProfile {
    decay_profile(&wb.d, &REPORTED_FRACTIONS)
}

pub fn decay_profile(d: &[f64], fractions: &[f64]) -> DecayProfile {
    let positive: Vec<f64> = d.iter().copied().take_while(|&v| v > 0.0).collect();
    let ratios = positive.windows(2).map(|w| w[1] / w[0]).collect();
    let total: f64 = positive.iter().sum();
    let components_for = fractions
        .iter()
        .map(|&f| {
            let mut acc = 0.0;
            let mut count = positive.len();
            for (i, v) in positive.iter().enumerate() {
                acc += v;
                if acc >= f * total {
                    count = i + 1;
                    break;
                }
            }
            (f, count)
        })
        .collect();
    DecayProfile {
        ratios,
        components_for,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, Edge, NetworkGraph};
    use crate::spectral::{eigenbasis, Eigenvalue};

    fn two_node() -> LaplacianBasis {
        let g = NetworkGraph::new(2, vec![Edge::new(0, 1, 0.5), Edge::new(1, 0, 0.5)]).unwrap();
        eigenbasis(&build_laplacian(&g)).unwrap()
    }

    #[test]
    fn two_node_c_and_q() {
        let b = two_node();
        let st = theorem1_sigma(&b, 0, 100).unwrap();
        assert_eq!(st.c[(0, 0)], 100.0);
        assert!((st.c[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((st.c[(1, 0)] - 1.0).abs() < 1e-12);
        assert!((st.c[(1, 1)] - 1.0).abs() < 1e-12);
        assert_eq!(st.q, b.w().column(0).into_owned());
        let s22 = st.q[1].powi(2) / (1.0 - (1.0 - b.eigenvalue(1)).powi(2));
        assert!((st.sigma[(1, 1)] - s22).abs() < 1e-12);
    }

    #[test]
    fn corollary_cases() {
        let b = two_node();
        let st = theorem1_sigma(&b, 0, 10_000).unwrap();
        let trace: f64 = st.sigma.diagonal().sum();
        assert!((corollary_lower_bound(&st, 2).unwrap() - trace).abs() < 1e-9);
        let k1 = corollary_lower_bound(&st, 1).unwrap();
        assert!((k1 - 10_000.0 * st.q[0].powi(2)).abs() < 1e-9);
        assert!(corollary_lower_bound(&st, 3).is_err());
        assert!(corollary_lower_bound(&st, 0).is_err());
    }

    #[test]
    fn regime_checks() {
        let cycle = NetworkGraph::new(
            3,
            vec![Edge::new(0, 1, 0.5), Edge::new(1, 2, 0.5), Edge::new(2, 0, 0.5)],
        )
        .unwrap();
        let b = eigenbasis(&build_laplacian(&cycle)).unwrap();
        assert!(matches!(theorem1_sigma(&b, 0, 10), Err(Error::OutsideTheoremRegime(_))));

        // Complete graph on 3 nodes: eigenvalue 0.9 is repeated.
        let k3 = NetworkGraph::new(
            3,
            (0..3)
                .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| Edge::new(i, j, 0.3)))
                .collect(),
        )
        .unwrap();
        let b = eigenbasis(&build_laplacian(&k3)).unwrap();
        assert!(matches!(theorem1_sigma(&b, 0, 10), Err(Error::OutsideTheoremRegime(_))));

        let heavy = NetworkGraph::undirected(2, &[(0, 1)]).unwrap();
        let b = eigenbasis(&build_laplacian(&heavy)).unwrap();
        assert!(matches!(theorem1_sigma(&b, 0, 10), Err(Error::OutsideTheoremRegime(_))));

        assert!(theorem1_sigma(&two_node(), 2, 10).is_err());
        assert!(theorem1_sigma(&two_node(), 0, 0).is_err());
    }

    #[test]
    fn whitening_of_diagonal_sigma_is_identity() {
        let b = two_node();
        let st = EnsembleStats {
            k: 1,
            z: 0,
            form: MomentForm::Asymptotic,
            q: DVector::zeros(2),
            c: DMatrix::zeros(2, 2),
            sigma: DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0])),
        };
        let wb = whitening_basis(&b, &st).unwrap();
        assert_eq!(wb.d, vec![3.0, 1.0]);
        assert!((wb.v_star.abs() - DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).amax() < 1e-14);
        let x = vec![0.7, -0.2];
        let s = b.components(&x).unwrap();
        let r = wb.components(&x).unwrap();
        assert!((r[0].abs() - s[1].abs()).abs() < 1e-14);
        assert!((r[1].abs() - s[0].abs()).abs() < 1e-14);
    }

    #[test]
    fn whitening_two_by_two_analytic() {
        let identity = LaplacianBasis::from_parts(
            vec![
                Eigenvalue {
                    re: 0.0,
                    im: 0.0,
                    flag: PairFlag::Real,
                };
                2
            ],
            DMatrix::identity(2, 2),
            true,
        )
        .unwrap();
        let st = EnsembleStats {
            k: 1,
            z: 0,
            form: MomentForm::Asymptotic,
            q: DVector::zeros(2),
            c: DMatrix::zeros(2, 2),
            sigma: DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
        };
        let wb = whitening_basis(&identity, &st).unwrap();
        assert!((wb.d[0] - 3.0).abs() < 1e-12 && (wb.d[1] - 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((wb.v_star.column(0) - DVector::from_vec(vec![h, h])).amax() < 1e-12);
        assert!((wb.v_star.column(1).abs() - DVector::from_vec(vec![h, h])).amax() < 1e-12);
        assert!(wb.v_star[(0, 1)] * wb.v_star[(1, 1)] < 0.0);
    }

    #[test]
    fn whitening_rejects_asymmetric() {
        let b = two_node();
        let st = EnsembleStats {
            k: 1,
            z: 0,
            form: MomentForm::Asymptotic,
            q: DVector::zeros(2),
            c: DMatrix::zeros(2, 2),
            sigma: DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]),
        };
        assert!(whitening_basis(&b, &st).is_err());
    }

    #[test]
    fn decay_profiles() {
        let p = decay_profile(&[8.0, 4.0, 2.0, 1.0], &REPORTED_FRACTIONS);
        assert_eq!(p.ratios, vec![0.5, 0.5, 0.5]);
        assert_eq!(p.components_for(0.89), Some(3));
        assert_eq!(p.components_for(0.999), Some(4));
        let single = decay_profile(&[5.0, 0.0, 0.0], &REPORTED_FRACTIONS);
        assert!(single.ratios.is_empty());
        assert_eq!(single.components_for(0.99), Some(1));
    }
}
