//! One-sided directional derivatives of ordered eigenvalues.
//!
//! At a point `x₀` where `λ_m(x₀)` has multiplicity `r`, take an orthonormal
//! basis `U₂` (n×r) of its eigenspace and compress the directional
//! derivative of the family onto it:
//!
//! ```text
//! F′(d) = U₂* (Σ_j d_j ∂A/∂x_j(x₀)) U₂
//! ```
//!
//! With `μ₁ ≥ … ≥ μ_r` the eigenvalues of `F′(d)` and `i` the position of
//! rank `m` inside its cluster, the one-sided derivative of `λ_m` along `d`
//! is `μ_i`. The sum of the cluster's eigenvalues is differentiable and its
//! gradient has components `trace(U₂* ∂A/∂x_j U₂)`.

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_gap_guard, default_cluster_tol, locate_cluster, ClusterIndex};
use crate::error::{Error, Result};
use crate::families::MatrixFamily;
use crate::hermitian::{
    ensure_hermitian, hermitian_eig, trace_hermitian, SpectralDecomposition, DEFAULT_CONVERGENCE_TOL,
};
use crate::matrix::ComplexMatrix;

/// Allowed deviation of `‖d‖₂` from one.
pub const UNIT_TOL: f64 = 1e-12;

/// Which computation produced a singular-value report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativePath {
    Embedding,
    Reduced,
}

/// Result of one directional-derivative evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub cluster: ClusterIndex,
    pub direction: Vec<f64>,
    pub f_prime: ComplexMatrix,
    /// Eigenvalues of `f_prime`, non-increasing.
    pub mu: Vec<f64>,
    /// 1-based position into `mu`.
    pub selected_index: usize,
    pub derivative: f64,
    /// Separation of the cluster from its neighbours; `None` when unbounded.
    pub guard: Option<f64>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub path: Option<DerivativePath>,
}

/// Checks `|‖d‖₂ − 1| ≤ UNIT_TOL`.
pub fn ensure_unit(d: &[f64]) -> Result<()> {
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitDirection { norm });
    }
    Ok(())
}

/// Scales `d` to unit length. Never applied implicitly.
pub fn normalize(d: &[f64]) -> Result<Vec<f64>> {
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NonUnitDirection { norm });
    }
    Ok(d.iter().map(|x| x / norm).collect())
}

/// Eigen-data of a Hermitian matrix localized at one rank.
#[derive(Debug, Clone)]
pub struct LocalCluster {
    pub decomposition: SpectralDecomposition,
    pub cluster: ClusterIndex,
    /// Orthonormal eigenvectors of the cluster (n×r).
    pub basis: ComplexMatrix,
    pub guard: f64,
    pub warnings: Vec<String>,
}

impl LocalCluster {
    /// Decomposes `a` and isolates the cluster of rank `m`.
    pub fn at(a: &ComplexMatrix, m: usize, cluster_tol: Option<f64>) -> Result<LocalCluster> {
        let decomposition = hermitian_eig(a, DEFAULT_CONVERGENCE_TOL)?;
        let tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(a.frobenius_norm()));
        let cluster = locate_cluster(&decomposition.eigenvalues, m, tol)?;
        let basis = eigvec_block(&decomposition, &cluster)?;
        let guard = cluster_gap_guard(&decomposition.eigenvalues, &cluster);
        let mut warnings = Vec::new();
        if guard <= 10.0 * tol {
            warnings.push(format!(
                "near_degenerate_cluster: gap {guard:e} to neighbouring eigenvalues is within 10x the cluster tolerance {tol:e}"
            ));
        }
        if cluster.r > 1 && cluster.width > tol {
            warnings.push(format!(
                "chained_cluster: width {:e} exceeds tolerance {tol:e}",
                cluster.width
            ));
        }
        Ok(LocalCluster {
            decomposition,
            cluster,
            basis,
            guard,
            warnings,
        })
    }

    /// Whether any warning should be surfaced to a caller as degraded accuracy.
    pub fn near_degenerate(&self) -> bool {
        self.guard <= 10.0 * self.cluster.tol_used
    }
}

/// Columns `lo..=hi` of the eigenvector matrix.
pub fn eigvec_block(decomp: &SpectralDecomposition, c: &ClusterIndex) -> Result<ComplexMatrix> {
    if c.lo == 0 || c.lo > c.hi || c.hi > decomp.dim {
        return Err(Error::IndexOutOfRange {
            index: c.hi,
            max: decomp.dim,
        });
    }
    Ok(decomp.vectors.column_range(c.lo - 1, c.hi))
}

/// `U₂* G U₂` for any square `g`, with no direction check.
pub fn compress(u2: &ComplexMatrix, g: &ComplexMatrix) -> ComplexMatrix {
    u2.adjoint_mul(&g.matmul(u2))
}

/// `F′(d) = U₂* (Σ_j d_j ∂A/∂x_j(x₀)) U₂` for a unit direction `d`.
pub fn build_f_prime(
    family: &MatrixFamily,
    x0: &[f64],
    u2: &ComplexMatrix,
    d: &[f64],
) -> Result<ComplexMatrix> {
    ensure_unit(d)?;
    if u2.rows() != family.rows() || !family.is_hermitian() {
        return Err(Error::Dimension(format!(
            "basis with {} rows does not fit a Hermitian {}x{} family",
            u2.rows(),
            family.rows(),
            family.cols()
        )));
    }
    Ok(compressed_partial(family, x0, u2, d)?.0)
}

/// `F′(d)` together with `‖G‖_F` of the uncompressed derivative.
fn compressed_partial(
    family: &MatrixFamily,
    x0: &[f64],
    u2: &ComplexMatrix,
    d: &[f64],
) -> Result<(ComplexMatrix, f64)> {
    let g = family.directional_partial(x0, d)?;
    Ok((compress(u2, &g), g.frobenius_norm()))
}

/// Eigenvalues of a compressed derivative, non-increasing.
///
/// `scale` is the norm of the matrix that was compressed; the rounding left
/// in `f` is relative to it, not to `‖f‖`, which may vanish.
pub(crate) fn sorted_eigenvalues(f: &ComplexMatrix, scale: f64) -> Result<Vec<f64>> {
    let defect = crate::hermitian::hermiticity_defect(f)?;
    let tol = 1e-10 * f.frobenius_norm().max(scale);
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    let h = f.hermitian_part();
    ensure_hermitian(&h)?;
    Ok(hermitian_eig(&h, DEFAULT_CONVERGENCE_TOL)?.eigenvalues)
}

fn require_hermitian(family: &MatrixFamily) -> Result<()> {
    if !family.is_hermitian() {
        return Err(Error::InvalidArgument(
            "eigenvalue derivatives need a Hermitian family".into(),
        ));
    }
    Ok(())
}

fn report(
    local: &LocalCluster,
    cluster: ClusterIndex,
    d: &[f64],
    f_prime: ComplexMatrix,
    mu: Vec<f64>,
    path: Option<DerivativePath>,
) -> DerivativeReport {
    DerivativeReport {
        derivative: mu[cluster.i - 1],
        selected_index: cluster.i,
        cluster,
        direction: d.to_vec(),
        f_prime,
        mu,
        guard: local.guard.is_finite().then_some(local.guard),
        warnings: local.warnings.clone(),
        path,
    }
}

/// One-sided derivative of `λ_m` at `x0` along the unit direction `d`.
///
/// `cluster_tol = None` uses `1e-8 · max(1, ‖A(x₀)‖_F)`.
pub fn eig_directional_derivative(
    family: &MatrixFamily,
    x0: &[f64],
    m: usize,
    d: &[f64],
    cluster_tol: Option<f64>,
) -> Result<DerivativeReport> {
    require_hermitian(family)?;
    ensure_unit(d)?;
    let local = LocalCluster::at(&family.evaluate(x0)?, m, cluster_tol)?;
    let (f_prime, scale) = compressed_partial(family, x0, &local.basis, d)?;
    let mu = sorted_eigenvalues(&f_prime, scale)?;
    Ok(report(&local, local.cluster, d, f_prime, mu, None))
}

/// Derivatives of every rank in the cluster of `m`, from a single `F′(d)`.
///
/// The returned reports are ordered by rank `lo..=hi`.
pub fn cluster_directional_derivatives(
    family: &MatrixFamily,
    x0: &[f64],
    m: usize,
    d: &[f64],
    cluster_tol: Option<f64>,
) -> Result<Vec<DerivativeReport>> {
    require_hermitian(family)?;
    ensure_unit(d)?;
    let local = LocalCluster::at(&family.evaluate(x0)?, m, cluster_tol)?;
    let (f_prime, scale) = compressed_partial(family, x0, &local.basis, d)?;
    let mu = sorted_eigenvalues(&f_prime, scale)?;
    let c = local.cluster;
    Ok((c.lo..=c.hi)
        .map(|k| {
            let member = c.for_member(k, local.decomposition.eigenvalues[k - 1]);
            report(&local, member, d, f_prime.clone(), mu.clone(), None)
        })
        .collect())
}

/// Gradient of the cluster sum `λ_lo + … + λ_hi` at `x0`.
pub fn cluster_sum_gradient(
    family: &MatrixFamily,
    x0: &[f64],
    m: usize,
    cluster_tol: Option<f64>,
) -> Result<Vec<f64>> {
    require_hermitian(family)?;
    let local = LocalCluster::at(&family.evaluate(x0)?, m, cluster_tol)?;
    family
        .partials(x0)?
        .iter()
        .map(|b| trace_hermitian(&compress(&local.basis, b)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{kato_family, make_affine};
    use crate::matrix::C64;

    #[test]
    fn kato_origin_is_plus_minus_one() {
        let f = kato_family();
        for d in [[1.0, 0.0], [0.6, 0.8], [-0.28, 0.96]] {
            let r1 = eig_directional_derivative(&f, &[0.0, 0.0], 1, &d, None).unwrap();
            let r2 = eig_directional_derivative(&f, &[0.0, 0.0], 2, &d, None).unwrap();
            assert!((r1.derivative - 1.0).abs() < 1e-12);
            assert!((r2.derivative + 1.0).abs() < 1e-12);
            assert_eq!(r1.cluster.r, 2);
            assert_eq!(r2.selected_index, 2);
            assert_eq!(r1.guard, None);
        }
    }

    #[test]
    fn kato_f_prime_at_origin() {
        let f = kato_family();
        let u2 = ComplexMatrix::identity(2);
        let d = [0.6, 0.8];
        let fp = build_f_prime(&f, &[0.0, 0.0], &u2, &d).unwrap();
        let expected = ComplexMatrix::from_rows(&[
            vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            vec![C64::new(0.0, -0.8), C64::new(-0.6, 0.0)],
        ])
        .unwrap();
        assert!(fp.max_abs_diff(&expected) < 1e-15);
        assert_eq!(trace_hermitian(&fp).unwrap(), 0.0);
    }

    #[test]
    fn kato_simple_point_matches_norm_gradient() {
        let r = eig_directional_derivative(&kato_family(), &[3.0, 4.0], 1, &[1.0, 0.0], None).unwrap();
        assert!((r.derivative - 0.6).abs() < 1e-12);
        assert_eq!(r.cluster.r, 1);
    }

    #[test]
    fn rejects_non_unit_direction() {
        let err = eig_directional_derivative(&kato_family(), &[0.0, 0.0], 1, &[1.0, 1.0], None).unwrap_err();
        assert!(matches!(err, Error::NonUnitDirection { .. }));
        assert_eq!(normalize(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
        assert!(normalize(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn rejects_non_hermitian_family() {
        let f = make_affine(
            ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            vec![ComplexMatrix::identity(2)],
        )
        .unwrap();
        assert!(eig_directional_derivative(&f, &[0.0], 1, &[1.0], None).is_err());
    }

    #[test]
    fn constant_family_has_zero_derivatives() {
        let base = ComplexMatrix::from_real_diagonal(&[2.0, 2.0, -1.0]);
        let f = make_affine(base, vec![ComplexMatrix::zeros(3, 3); 2]).unwrap();
        for m in 1..=3 {
            let r = eig_directional_derivative(&f, &[0.3, 0.1], m, &[0.0, 1.0], None).unwrap();
            assert_eq!(r.derivative, 0.0);
            assert_eq!(
                cluster_sum_gradient(&f, &[0.3, 0.1], m, None).unwrap(),
                vec![0.0, 0.0]
            );
        }
    }

    #[test]
    fn cluster_sum_gradient_examples() {
        let g = cluster_sum_gradient(&kato_family(), &[0.0, 0.0], 1, None).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));

        let f = make_affine(ComplexMatrix::zeros(2, 2), vec![ComplexMatrix::identity(2)]).unwrap();
        let g = cluster_sum_gradient(&f, &[0.0], 1, None).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn f_prime_is_linear_and_odd_in_direction() {
        let f = kato_family();
        let u2 = ComplexMatrix::identity(2);
        let g1 = f.directional_partial(&[0.0, 0.0], &[0.3, -0.2]).unwrap();
        let g2 = f.directional_partial(&[0.0, 0.0], &[0.5, 0.9]).unwrap();
        let g12 = f.directional_partial(&[0.0, 0.0], &[0.8, 0.7]).unwrap();
        let lhs = compress(&u2, &g12);
        let rhs = &compress(&u2, &g1) + &compress(&u2, &g2);
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);

        let d = [0.6, 0.8];
        let plus = build_f_prime(&f, &[0.0, 0.0], &u2, &d).unwrap();
        let minus = build_f_prime(&f, &[0.0, 0.0], &u2, &[-0.6, -0.8]).unwrap();
        assert_eq!(minus, -&plus);
    }

    #[test]
    fn simple_eigenvalue_block_is_one_column() {
        let a = ComplexMatrix::from_real_diagonal(&[3.0, 1.0, -2.0]);
        let local = LocalCluster::at(&a, 2, None).unwrap();
        assert_eq!(local.basis.shape(), (3, 1));
        assert!((local.basis[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(local.warnings.is_empty());
    }

    #[test]
    fn cluster_members_share_one_f_prime() {
        let f = kato_family();
        let reports = cluster_directional_derivatives(&f, &[0.0, 0.0], 2, &[0.0, 1.0], None).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].cluster.m, 1);
        assert!((reports[0].derivative - 1.0).abs() < 1e-12);
        assert!((reports[1].derivative + 1.0).abs() < 1e-12);
        assert_eq!(reports[0].f_prime, reports[1].f_prime);
    }

    #[test]
    fn near_degenerate_cluster_warns() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 1.0 - 5e-8, 0.0]);
        let f = make_affine(a, vec![ComplexMatrix::identity(3)]).unwrap();
        let r = eig_directional_derivative(&f, &[0.0], 1, &[1.0], Some(1e-8)).unwrap();
        assert_eq!(r.cluster.r, 1);
        assert!(r
            .warnings
            .iter()
            .any(|w| w.starts_with("near_degenerate_cluster")));
    }
}
