//! Directional derivatives of singular values.
//!
//! A rectangular `A` (m×n) is lifted to the Hermitian embedding
//! `M = [[0, A], [A*, 0]]`, whose spectrum is `σ₁ ≥ … ≥ σ_q`, then
//! `m + n − 2q` zeros, then `−σ_q ≥ … ≥ −σ₁` (`q = min(m, n)`). Derivatives
//! of `σ_k` are eigenvalue derivatives of `M` at rank `k`.
//!
//! Two routes compute the compressed matrix:
//!
//! * **embedding**: `W₂* (Σ d_j ∂M/∂x_j) W₂` with `W₂` the (m+n)×r block
//!   of embedding eigenvectors;
//! * **reduced**: split `W₂ = [U₂; V₂]` and form `X + X*` with
//!   `X = U₂* (Σ d_j ∂A/∂x_j) V₂`, an r×r computation.
//!
//! Both are exposed so each can check the other.

use serde::{Deserialize, Serialize};

use crate::deriv_eig::{
    compress, ensure_unit, sorted_eigenvalues, DerivativePath, DerivativeReport, LocalCluster,
};
use crate::error::{Error, Result};
use crate::families::MatrixFamily;
use crate::hermitian::{hermitian_eig, trace_hermitian, DEFAULT_CONVERGENCE_TOL};
use crate::matrix::{ComplexMatrix, C64};

/// Relative floor below which singular values are treated as zero.
pub const SIGMA_FLOOR_REL: f64 = 1e-6;

/// `[[0, A], [A*, 0]]`.
pub fn wielandt_embed(a: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = a.shape();
    let mut out = ComplexMatrix::zeros(m + n, m + n);
    out.set_block(0, m, a);
    out.set_block(m, 0, &a.adjoint());
    out
}

/// Singular values of `A` read off the spectrum of its embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularDecomposition {
    pub rows: usize,
    pub cols: usize,
    /// Non-increasing, length `min(rows, cols)`.
    pub sigma: Vec<f64>,
    /// Full embedding spectrum, non-increasing.
    pub embedding_eigenvalues: Vec<f64>,
    /// Unitary matrix diagonalizing the embedding.
    pub w_matrix: ComplexMatrix,
}

impl SingularDecomposition {
    pub fn q(&self) -> usize {
        self.sigma.len()
    }

    /// Upper `rows` entries of column `j` (zero-based) of `W`.
    pub fn u_part(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.w_matrix[(i, j)]).collect()
    }

    /// Lower `cols` entries of column `j` (zero-based) of `W`.
    pub fn v_part(&self, j: usize) -> Vec<C64> {
        (self.rows..self.rows + self.cols)
            .map(|i| self.w_matrix[(i, j)])
            .collect()
    }
}

/// Decomposes the embedding of `a`.
pub fn sv_decomposition(a: &ComplexMatrix) -> Result<SingularDecomposition> {
    let (rows, cols) = a.shape();
    let eig = hermitian_eig(&wielandt_embed(a), DEFAULT_CONVERGENCE_TOL)?;
    let q = rows.min(cols);
    Ok(SingularDecomposition {
        rows,
        cols,
        sigma: eig.eigenvalues[..q].iter().map(|&s| s.max(0.0)).collect(),
        embedding_eigenvalues: eig.eigenvalues,
        w_matrix: eig.vectors,
    })
}

/// `1e-6 · ‖A‖_F`.
pub fn sigma_floor(a: &ComplexMatrix) -> f64 {
    SIGMA_FLOOR_REL * a.frobenius_norm()
}

/// Embedding eigen-data localized at singular value rank `k`.
pub fn local_sv_cluster(a: &ComplexMatrix, k: usize, cluster_tol: Option<f64>) -> Result<LocalCluster> {
    let q = a.rows().min(a.cols());
    if k == 0 || k > q {
        return Err(Error::IndexOutOfRange { index: k, max: q });
    }
    let local = LocalCluster::at(&wielandt_embed(a), k, cluster_tol)?;
    let floor = sigma_floor(a);
    if local.cluster.value.is_nan() || local.cluster.value <= floor {
        return Err(Error::SigmaAtZero {
            sigma: local.cluster.value,
            floor,
        });
    }
    if local.cluster.hi > q {
        return Err(Error::ClusterIntoZeroBlock {
            hi: local.cluster.hi,
            q,
        });
    }
    Ok(local)
}

fn embedded_partial(family: &MatrixFamily, x0: &[f64], d: &[f64]) -> Result<ComplexMatrix> {
    Ok(wielandt_embed(&family.directional_partial(x0, d)?))
}

fn check_direction(family: &MatrixFamily, d: &[f64]) -> Result<()> {
    if d.len() != family.param_dim() {
        return Err(Error::Dimension(format!(
            "direction has {} coordinates, family expects {}",
            d.len(),
            family.param_dim()
        )));
    }
    ensure_unit(d)
}

fn finish(
    local: &LocalCluster,
    d: &[f64],
    f_prime: ComplexMatrix,
    scale: f64,
    path: DerivativePath,
) -> Result<DerivativeReport> {
    let mu = sorted_eigenvalues(&f_prime, scale)?;
    let c = local.cluster;
    Ok(DerivativeReport {
        derivative: mu[c.i - 1],
        selected_index: c.i,
        cluster: c,
        direction: d.to_vec(),
        f_prime,
        mu,
        guard: local.guard.is_finite().then_some(local.guard),
        warnings: local.warnings.clone(),
        path: Some(path),
    })
}

/// One-sided derivative of `σ_k` along `d`, through the full embedding.
pub fn sv_directional_derivative(
    family: &MatrixFamily,
    x0: &[f64],
    k: usize,
    d: &[f64],
    cluster_tol: Option<f64>,
) -> Result<DerivativeReport> {
    check_direction(family, d)?;
    let local = local_sv_cluster(&family.evaluate(x0)?, k, cluster_tol)?;
    let g = embedded_partial(family, x0, d)?;
    let f_prime = compress(&local.basis, &g);
    finish(&local, d, f_prime, g.frobenius_norm(), DerivativePath::Embedding)
}

/// `X + X*` with `X = U₂* G V₂`.
pub fn reduced_f_prime(u2: &ComplexMatrix, v2: &ComplexMatrix, g: &ComplexMatrix) -> ComplexMatrix {
    let x = u2.adjoint_mul(&g.matmul(v2));
    &x + &x.adjoint()
}

fn split_basis(basis: &ComplexMatrix, rows: usize, cols: usize) -> (ComplexMatrix, ComplexMatrix) {
    (basis.row_range(0, rows), basis.row_range(rows, rows + cols))
}

/// One-sided derivative of `σ_k` along `d`, through the r×r reduced formula.
pub fn sv_derivative_reduced(
    family: &MatrixFamily,
    x0: &[f64],
    k: usize,
    d: &[f64],
    cluster_tol: Option<f64>,
) -> Result<DerivativeReport> {
    check_direction(family, d)?;
    let local = local_sv_cluster(&family.evaluate(x0)?, k, cluster_tol)?;
    let (u2, v2) = split_basis(&local.basis, family.rows(), family.cols());
    let g = family.directional_partial(x0, d)?;
    let scale = 2f64.sqrt() * g.frobenius_norm();
    finish(
        &local,
        d,
        reduced_f_prime(&u2, &v2, &g),
        scale,
        DerivativePath::Reduced,
    )
}

/// Gradient of `σ_lo + … + σ_hi` for the cluster of rank `k`.
pub fn sv_cluster_sum_gradient(
    family: &MatrixFamily,
    x0: &[f64],
    k: usize,
    cluster_tol: Option<f64>,
) -> Result<Vec<f64>> {
    let local = local_sv_cluster(&family.evaluate(x0)?, k, cluster_tol)?;
    family
        .partials(x0)?
        .iter()
        .map(|b| trace_hermitian(&compress(&local.basis, &wielandt_embed(b))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_affine;
    use crate::hermitian::hermiticity_defect;

    fn scalar_family() -> MatrixFamily {
        make_affine(ComplexMatrix::zeros(1, 1), vec![ComplexMatrix::identity(1)]).unwrap()
    }

    #[test]
    fn embed_scalar_and_zero() {
        let a = ComplexMatrix::from_real_rows(&[vec![2.0]]).unwrap();
        let m = wielandt_embed(&a);
        assert_eq!(
            m,
            ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap()
        );
        let s = sv_decomposition(&a).unwrap();
        assert!((s.embedding_eigenvalues[0] - 2.0).abs() < 1e-15);
        assert!((s.embedding_eigenvalues[1] + 2.0).abs() < 1e-15);

        let z = wielandt_embed(&ComplexMatrix::zeros(2, 3));
        assert_eq!(z.shape(), (5, 5));
        assert_eq!(z.frobenius_norm(), 0.0);
        assert_eq!(hermiticity_defect(&z).unwrap(), 0.0);
    }

    #[test]
    fn singular_values_of_small_matrices() {
        let s = sv_decomposition(&ComplexMatrix::from_real_diagonal(&[3.0, 1.0])).unwrap();
        assert!((s.sigma[0] - 3.0).abs() < 1e-14 && (s.sigma[1] - 1.0).abs() < 1e-14);

        let s = sv_decomposition(&ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap())
            .unwrap();
        assert!((s.sigma[0] - 2.0).abs() < 1e-14 && s.sigma[1].abs() < 1e-14);
    }

    #[test]
    fn scalar_absolute_value() {
        let f = scalar_family();
        for path in [sv_directional_derivative, sv_derivative_reduced] {
            let r = path(&f, &[1.0], 1, &[1.0], None).unwrap();
            assert!((r.derivative - 1.0).abs() < 1e-14);
            let r = path(&f, &[-2.0], 1, &[1.0], None).unwrap();
            assert!((r.derivative + 1.0).abs() < 1e-14);
        }
        let red = sv_derivative_reduced(&f, &[1.0], 1, &[1.0], None).unwrap();
        assert!((red.f_prime[(0, 0)].re - 1.0).abs() < 1e-14);
        let g = sv_cluster_sum_gradient(&f, &[1.0], 1, None).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sigma_at_zero_is_refused() {
        let f = scalar_family();
        let err = sv_directional_derivative(&f, &[0.0], 1, &[1.0], None).unwrap_err();
        assert_eq!(err.code(), "sigma_at_zero");
        let rank_one = make_affine(
            ComplexMatrix::from_real_diagonal(&[1.0, 0.0]),
            vec![ComplexMatrix::zeros(2, 2)],
        )
        .unwrap();
        assert!(matches!(
            sv_derivative_reduced(&rank_one, &[0.0], 2, &[1.0], None),
            Err(Error::SigmaAtZero { .. })
        ));
        assert!(matches!(
            sv_derivative_reduced(&rank_one, &[0.0], 3, &[1.0], None),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn scaled_identity_cluster_gradient() {
        let f = make_affine(ComplexMatrix::zeros(2, 2), vec![ComplexMatrix::identity(2)]).unwrap();
        let g = sv_cluster_sum_gradient(&f, &[1.0], 1, None).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_rectangular_family() {
        let base = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![0.5, 0.5]]).unwrap();
        let f = make_affine(base, vec![ComplexMatrix::zeros(3, 2)]).unwrap();
        for k in 1..=2 {
            let e = sv_directional_derivative(&f, &[0.0], k, &[1.0], None).unwrap();
            let r = sv_derivative_reduced(&f, &[0.0], k, &[1.0], None).unwrap();
            assert_eq!(e.derivative, 0.0);
            assert_eq!(r.derivative, 0.0);
            assert_eq!(r.f_prime.frobenius_norm(), 0.0);
            assert_eq!(sv_cluster_sum_gradient(&f, &[0.0], k, None).unwrap(), vec![0.0]);
        }
    }
}
