//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Eigenvalues are always returned in non-increasing order, matching the
//! ranking convention used everywhere else in the crate: `eigenvalues[0]`
//! is the largest eigenvalue and column 0 of `vectors` its eigenvector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Off-diagonal Frobenius mass, relative to `‖A‖_F`, at which iteration stops.
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-14;

/// Upper bound on cyclic sweeps.
pub const DEFAULT_MAX_SWEEPS: usize = 60;

/// Relative slack for accepting a matrix as Hermitian.
pub const HERMIT_REL_TOL: f64 = 1e-12;

/// Eigenvalues (non-increasing) and matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors aligned with `eigenvalues`.
    pub vectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// `‖V* V − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.vectors.adjoint_mul(&self.vectors);
        (&gram - &ComplexMatrix::identity(self.dim)).frobenius_norm()
    }

    /// `‖A V − V diag(λ)‖_F`.
    pub fn residual(&self, a: &ComplexMatrix) -> f64 {
        let av = a.matmul(&self.vectors);
        let vl = ComplexMatrix::from_fn(self.dim, self.dim, |i, j| {
            self.vectors[(i, j)] * self.eigenvalues[j]
        });
        (&av - &vl).frobenius_norm()
    }

    /// `V diag(λ) V*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let vl = ComplexMatrix::from_fn(self.dim, self.dim, |i, j| {
            self.vectors[(i, j)] * self.eigenvalues[j]
        });
        vl.matmul(&self.vectors.adjoint())
    }
}

/// Jacobi iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiConfig {
    pub convergence_tol: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiConfig {
    fn default() -> Self {
        JacobiConfig {
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

/// `‖A − A*‖_F` for a square matrix.
pub fn hermiticity_defect(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            sum += (a[(i, j)] - a[(j, i)].conj()).norm_sqr();
        }
    }
    Ok(sum.sqrt())
}

/// Fails unless `A` is square and Hermitian within `1e-12 · ‖A‖_F`.
pub fn ensure_hermitian(a: &ComplexMatrix) -> Result<()> {
    let defect = hermiticity_defect(a)?;
    let tol = HERMIT_REL_TOL * a.frobenius_norm();
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    Ok(())
}

/// Real part of the trace of a Hermitian matrix.
///
/// The imaginary part of the trace must vanish to `1e-10 · n · max(1, ‖A‖_F)`.
pub fn trace_hermitian(a: &ComplexMatrix) -> Result<f64> {
    let tr = a.trace()?;
    let tol = 1e-10 * a.rows() as f64 * a.frobenius_norm().max(1.0);
    if tr.im.abs() > tol {
        return Err(Error::NotHermitian {
            defect: tr.im.abs(),
            tol,
        });
    }
    Ok(tr.re)
}

/// Eigendecomposition with the default sweep limit.
pub fn hermitian_eig(a: &ComplexMatrix, convergence_tol: f64) -> Result<SpectralDecomposition> {
    hermitian_eig_with(
        a,
        &JacobiConfig {
            convergence_tol,
            ..JacobiConfig::default()
        },
    )
}

/// Cyclic-by-row complex Jacobi.
///
/// Each rotation is a phase change `diag(1, e^{-iφ})` that makes the pivot
/// real, followed by a real Givens rotation that annihilates it.
pub fn hermitian_eig_with(a: &ComplexMatrix, config: &JacobiConfig) -> Result<SpectralDecomposition> {
    if config.convergence_tol.is_nan() || config.convergence_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "convergence tolerance must be positive, got {}",
            config.convergence_tol
        )));
    }
    ensure_hermitian(a)?;

    let n = a.rows();
    let norm = a.frobenius_norm();
    let mut w = a.hermitian_part();
    for i in 0..n {
        w[(i, i)].im = 0.0;
    }
    let mut v = ComplexMatrix::identity(n);

    let mut sweeps = 0;
    if norm > 0.0 && n > 1 {
        loop {
            let off = off_diagonal_norm(&w);
            if off <= config.convergence_tol * norm {
                break;
            }
            if sweeps == config.max_sweeps {
                return Err(Error::Convergence {
                    sweeps,
                    residual: off / norm,
                });
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut w, &mut v, p, q, sweeps);
                }
            }
            sweeps += 1;
        }
    }
    log::debug!("jacobi: n={n} converged after {sweeps} sweeps");

    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep the Jacobi output order
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    Ok(SpectralDecomposition {
        dim: n,
        eigenvalues: order.iter().map(|&i| diag[i]).collect(),
        vectors: v.permute_columns(&order),
    })
}

fn off_diagonal_norm(w: &ComplexMatrix) -> f64 {
    let n = w.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += w[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn rotate(w: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, sweep: usize) {
    let n = w.rows();
    let apq = w[(p, q)];
    let beta = apq.norm();
    if beta == 0.0 {
        return;
    }
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;

    // pivot below the precision of both diagonal entries: drop it
    let g = 100.0 * beta;
    if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
        w[(p, q)] = C64::new(0.0, 0.0);
        w[(q, p)] = C64::new(0.0, 0.0);
        return;
    }

    let theta = (aqq - app) / (2.0 * beta);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = (apq / beta).conj();

    // G = diag(1, phase) · [[c, s], [-s, c]]
    let g11 = C64::new(c, 0.0);
    let g12 = C64::new(s, 0.0);
    let g21 = phase * (-s);
    let g22 = phase * c;

    for k in 0..n {
        let wkp = w[(k, p)];
        let wkq = w[(k, q)];
        w[(k, p)] = wkp * g11 + wkq * g21;
        w[(k, q)] = wkp * g12 + wkq * g22;
    }
    for k in 0..n {
        let wpk = w[(p, k)];
        let wqk = w[(q, k)];
        w[(p, k)] = g11.conj() * wpk + g21.conj() * wqk;
        w[(q, k)] = g12.conj() * wpk + g22.conj() * wqk;
    }
    w[(p, q)] = C64::new(0.0, 0.0);
    w[(q, p)] = C64::new(0.0, 0.0);
    w[(p, p)].im = 0.0;
    w[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g11 + vkq * g21;
        v[(k, q)] = vkp * g12 + vkq * g22;
    }
}
