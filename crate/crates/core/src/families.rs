//! Parameterized matrix families `x ↦ A(x)` with exact partial derivatives.
//!
//! Coordinates of the parameter vector are indexed from zero in this API;
//! ranks of eigenvalues and singular values are indexed from one.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{hermiticity_defect, HERMIT_REL_TOL};
use crate::matrix::{ComplexMatrix, C64};

type Evaluator = dyn Fn(&[f64]) -> ComplexMatrix + Send + Sync;
type Partial = dyn Fn(&[f64], usize) -> ComplexMatrix + Send + Sync;

/// Axis-aligned box `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn contains(&self, x: &[f64]) -> Result<()> {
        for (k, ((&xk, &lo), &hi)) in x.iter().zip(&self.lower).zip(&self.upper).enumerate() {
            if !(lo <= xk && xk <= hi) {
                return Err(Error::OutOfDomain { coordinate: k });
            }
        }
        Ok(())
    }
}

/// `A(x) = base + Σ_j x_j · coefficients[j]`.
///
/// JSON form: `{"base": M, "coefficients": [M, ...], "hermitian": bool}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFamily {
    pub base: ComplexMatrix,
    pub coefficients: Vec<ComplexMatrix>,
    #[serde(default)]
    pub hermitian: bool,
}

#[derive(Clone)]
enum Kind {
    Affine(Arc<AffineFamily>),
    Custom {
        eval: Arc<Evaluator>,
        partial: Arc<Partial>,
    },
}

/// A C¹ matrix-valued function of `param_dim` real variables.
#[derive(Clone)]
pub struct MatrixFamily {
    param_dim: usize,
    rows: usize,
    cols: usize,
    hermitian: bool,
    domain: Option<BoxDomain>,
    kind: Kind,
}

impl fmt::Debug for MatrixFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixFamily")
            .field("param_dim", &self.param_dim)
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("hermitian", &self.hermitian)
            .field("affine", &matches!(self.kind, Kind::Affine(_)))
            .finish()
    }
}

fn is_hermitian(m: &ComplexMatrix) -> bool {
    m.is_square() && hermiticity_defect(m).is_ok_and(|d| d <= HERMIT_REL_TOL * m.frobenius_norm())
}

/// Builds the affine family `base + Σ x_j coefficients[j]`.
///
/// The Hermitian flag is set exactly when every input matrix is Hermitian.
pub fn make_affine(base: ComplexMatrix, coefficients: Vec<ComplexMatrix>) -> Result<MatrixFamily> {
    if coefficients.is_empty() {
        return Err(Error::NoParameters);
    }
    if let Some(bad) = coefficients.iter().position(|b| b.shape() != base.shape()) {
        return Err(Error::Dimension(format!(
            "coefficient {bad} is {:?}, base is {:?}",
            coefficients[bad].shape(),
            base.shape()
        )));
    }
    let hermitian = is_hermitian(&base) && coefficients.iter().all(is_hermitian);
    Ok(MatrixFamily {
        param_dim: coefficients.len(),
        rows: base.rows(),
        cols: base.cols(),
        hermitian,
        domain: None,
        kind: Kind::Affine(Arc::new(AffineFamily {
            base,
            coefficients,
            hermitian,
        })),
    })
}

impl AffineFamily {
    /// Validates the payload and turns it into a family.
    ///
    /// A payload declaring `"hermitian": true` must actually be Hermitian;
    /// one declaring `false` is treated as a general family.
    pub fn into_family(self) -> Result<MatrixFamily> {
        let declared = self.hermitian;
        let mut family = make_affine(self.base, self.coefficients)?;
        if declared && !family.hermitian {
            let a = family.affine().expect("affine");
            let worst = std::iter::once(&a.base)
                .chain(&a.coefficients)
                .filter_map(|m| hermiticity_defect(m).ok())
                .fold(0.0, f64::max);
            return Err(Error::NotHermitian {
                defect: worst,
                tol: HERMIT_REL_TOL,
            });
        }
        if !declared {
            family.hermitian = false;
            if let Kind::Affine(a) = &mut family.kind {
                Arc::make_mut(a).hermitian = false;
            }
        }
        Ok(family)
    }
}

impl MatrixFamily {
    /// Wraps an arbitrary evaluator and its partial derivatives.
    ///
    /// `partial(x, j)` must return `∂A/∂x_j` at `x` for `j < param_dim`.
    /// A family declared Hermitian is spot-checked at the origin.
    pub fn from_fns<E, P>(
        param_dim: usize,
        rows: usize,
        cols: usize,
        hermitian: bool,
        eval: E,
        partial: P,
    ) -> Result<MatrixFamily>
    where
        E: Fn(&[f64]) -> ComplexMatrix + Send + Sync + 'static,
        P: Fn(&[f64], usize) -> ComplexMatrix + Send + Sync + 'static,
    {
        if param_dim == 0 {
            return Err(Error::NoParameters);
        }
        let family = MatrixFamily {
            param_dim,
            rows,
            cols,
            hermitian,
            domain: None,
            kind: Kind::Custom {
                eval: Arc::new(eval),
                partial: Arc::new(partial),
            },
        };
        let origin = vec![0.0; param_dim];
        let a0 = family.raw_eval(&origin);
        if a0.shape() != (rows, cols) {
            return Err(Error::Dimension(format!(
                "evaluator returned {:?}, declared {rows}x{cols}",
                a0.shape()
            )));
        }
        if hermitian {
            for m in std::iter::once(a0).chain((0..param_dim).map(|j| family.raw_partial(&origin, j))) {
                if !is_hermitian(&m) {
                    return Err(Error::NotHermitian {
                        defect: hermiticity_defect(&m).unwrap_or(f64::INFINITY),
                        tol: HERMIT_REL_TOL * m.frobenius_norm(),
                    });
                }
            }
        }
        Ok(family)
    }

    /// Restricts evaluation to a box.
    pub fn with_domain(mut self, domain: BoxDomain) -> Result<MatrixFamily> {
        if domain.lower.len() != self.param_dim || domain.upper.len() != self.param_dim {
            return Err(Error::Dimension("domain bounds must match param_dim".into()));
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn domain(&self) -> Option<&BoxDomain> {
        self.domain.as_ref()
    }

    /// The affine payload, when the family is affine.
    pub fn affine(&self) -> Option<&AffineFamily> {
        match &self.kind {
            Kind::Affine(a) => Some(a),
            Kind::Custom { .. } => None,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.param_dim {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, family expects {}",
                x.len(),
                self.param_dim
            )));
        }
        if let Some(domain) = &self.domain {
            domain.contains(x)?;
        }
        Ok(())
    }

    fn raw_eval(&self, x: &[f64]) -> ComplexMatrix {
        match &self.kind {
            Kind::Affine(a) => {
                let mut out = a.base.clone();
                for (xj, bj) in x.iter().zip(&a.coefficients) {
                    out.add_scaled(*xj, bj);
                }
                out
            }
            Kind::Custom { eval, .. } => eval(x),
        }
    }

    fn raw_partial(&self, x: &[f64], j: usize) -> ComplexMatrix {
        match &self.kind {
            Kind::Affine(a) => a.coefficients[j].clone(),
            Kind::Custom { partial, .. } => partial(x, j),
        }
    }

    /// `A(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<ComplexMatrix> {
        self.check_point(x)?;
        let a = self.raw_eval(x);
        if a.shape() != (self.rows, self.cols) {
            return Err(Error::Dimension(format!(
                "evaluator returned {:?}, declared {}x{}",
                a.shape(),
                self.rows,
                self.cols
            )));
        }
        Ok(a)
    }

    /// `∂A/∂x_j (x)` for a zero-based coordinate `j`.
    pub fn partial(&self, x: &[f64], j: usize) -> Result<ComplexMatrix> {
        self.check_point(x)?;
        if j >= self.param_dim {
            return Err(Error::IndexOutOfRange {
                index: j + 1,
                max: self.param_dim,
            });
        }
        Ok(self.raw_partial(x, j))
    }

    /// All partials at `x`.
    pub fn partials(&self, x: &[f64]) -> Result<Vec<ComplexMatrix>> {
        (0..self.param_dim).map(|j| self.partial(x, j)).collect()
    }

    /// `Σ_j d_j ∂A/∂x_j (x)`.
    pub fn directional_partial(&self, x: &[f64], d: &[f64]) -> Result<ComplexMatrix> {
        if d.len() != self.param_dim {
            return Err(Error::Dimension(format!(
                "direction has {} coordinates, family expects {}",
                d.len(),
                self.param_dim
            )));
        }
        let mut g = ComplexMatrix::zeros(self.rows, self.cols);
        for (j, &dj) in d.iter().enumerate() {
            g.add_scaled(dj, &self.partial(x, j)?);
        }
        Ok(g)
    }
}

/// The 2×2 Hermitian family `[[x₁, i·x₂], [−i·x₂, −x₁]]`.
///
/// Its eigenvalues are `±‖x‖₂`, so both ordered eigenvalues fail to be
/// differentiable at the origin while still having directional derivatives.
pub fn kato_family() -> MatrixFamily {
    let zero = C64::new(0.0, 0.0);
    let b1 = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).expect("static");
    let b2 = ComplexMatrix::from_rows(&[vec![zero, C64::new(0.0, 1.0)], vec![C64::new(0.0, -1.0), zero]])
        .expect("static");
    make_affine(ComplexMatrix::zeros(2, 2), vec![b1, b2]).expect("static")
}

/// `‖(A(x₀+h e_j) − A(x₀−h e_j)) / 2h − ∂A/∂x_j(x₀)‖_F`.
pub fn fd_partial_check(family: &MatrixFamily, x0: &[f64], j: usize, h: f64) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let exact = family.partial(x0, j)?;
    let mut fwd = x0.to_vec();
    fwd[j] += h;
    let mut bwd = x0.to_vec();
    bwd[j] -= h;
    let diff = (&family.evaluate(&fwd)? - &family.evaluate(&bwd)?).scale_real(0.5 / h);
    Ok((&diff - &exact).frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kato_matches_closed_form() {
        let f = kato_family();
        assert!(f.is_hermitian());
        assert_eq!(f.param_dim(), 2);
        let a = f.evaluate(&[3.0, 4.0]).unwrap();
        assert_eq!(a[(0, 0)], C64::new(3.0, 0.0));
        assert_eq!(a[(0, 1)], C64::new(0.0, 4.0));
        assert_eq!(a[(1, 0)], C64::new(0.0, -4.0));
        assert_eq!(a[(1, 1)], C64::new(-3.0, 0.0));
        assert_eq!(f.evaluate(&[0.0, 0.0]).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn affine_partials_are_constant() {
        let f = kato_family();
        assert_eq!(
            f.partial(&[0.1, 0.2], 1).unwrap(),
            f.partial(&[-5.0, 7.0], 1).unwrap()
        );
        assert!(matches!(
            f.partial(&[0.0, 0.0], 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn affine_requires_parameters_and_matching_shapes() {
        assert_eq!(
            make_affine(ComplexMatrix::identity(2), vec![]).unwrap_err(),
            Error::NoParameters
        );
        assert!(matches!(
            make_affine(ComplexMatrix::identity(2), vec![ComplexMatrix::identity(3)]),
            Err(Error::Dimension(_))
        ));
        let rect = make_affine(ComplexMatrix::zeros(2, 3), vec![ComplexMatrix::zeros(2, 3)]).unwrap();
        assert!(!rect.is_hermitian());
    }

    #[test]
    fn declared_hermitian_payload_is_verified() {
        let bad = AffineFamily {
            base: ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            coefficients: vec![ComplexMatrix::identity(2)],
            hermitian: true,
        };
        assert!(matches!(bad.into_family(), Err(Error::NotHermitian { .. })));

        let general = AffineFamily {
            base: ComplexMatrix::identity(2),
            coefficients: vec![ComplexMatrix::identity(2)],
            hermitian: false,
        };
        assert!(!general.into_family().unwrap().is_hermitian());
    }

    #[test]
    fn fd_partial_check_examples() {
        let f = kato_family();
        assert!(fd_partial_check(&f, &[1.0, 2.0], 0, 1e-5).unwrap() <= 1e-10);
        assert!(fd_partial_check(&f, &[1.0, 2.0], 1, 0.3).unwrap() <= 1e-12);

        // corrupt ∂A/∂x₁ by adding the identity
        let a = f.affine().unwrap().clone();
        let broken = MatrixFamily::from_fns(
            2,
            2,
            2,
            true,
            move |x| {
                let mut m = a.base.clone();
                m.add_scaled(x[0], &a.coefficients[0]);
                m.add_scaled(x[1], &a.coefficients[1]);
                m
            },
            {
                let a = f.affine().unwrap().clone();
                move |_, j| {
                    if j == 0 {
                        &a.coefficients[0] + &ComplexMatrix::identity(2)
                    } else {
                        a.coefficients[1].clone()
                    }
                }
            },
        )
        .unwrap();
        let defect = fd_partial_check(&broken, &[1.0, 2.0], 0, 1e-5).unwrap();
        assert!(defect > 0.1);
        assert!((defect - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn nonlinear_family_central_differences_are_second_order() {
        // A(x) = [[x₀², i·x₀x₁], [−i·x₀x₁, x₁³]]
        let f = MatrixFamily::from_fns(
            2,
            2,
            2,
            true,
            |x| {
                ComplexMatrix::from_rows(&[
                    vec![C64::new(x[0] * x[0], 0.0), C64::new(0.0, x[0] * x[1])],
                    vec![C64::new(0.0, -x[0] * x[1]), C64::new(x[1].powi(3), 0.0)],
                ])
                .unwrap()
            },
            |x, j| {
                let (d00, d01, d11) = if j == 0 {
                    (2.0 * x[0], x[1], 0.0)
                } else {
                    (0.0, x[0], 3.0 * x[1] * x[1])
                };
                ComplexMatrix::from_rows(&[
                    vec![C64::new(d00, 0.0), C64::new(0.0, d01)],
                    vec![C64::new(0.0, -d01), C64::new(d11, 0.0)],
                ])
                .unwrap()
            },
        )
        .unwrap();
        let x0 = [0.7, -1.3];
        let e: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&h| fd_partial_check(&f, &x0, 1, h).unwrap())
            .collect();
        // error = h² for the cubic entry
        for (err, h) in e.iter().zip([1e-2, 5e-3, 2.5e-3]) {
            assert!(*err <= 1.01 * h * h, "err {err} at h {h}");
        }
        assert!((e[0] / e[1] - 4.0).abs() < 1e-3);
        assert!((e[1] / e[2] - 4.0).abs() < 1e-3);
    }

    #[test]
    fn box_domain_is_enforced() {
        let f = kato_family()
            .with_domain(BoxDomain {
                lower: vec![-1.0, -1.0],
                upper: vec![1.0, 1.0],
            })
            .unwrap();
        assert!(f.evaluate(&[0.5, 0.5]).is_ok());
        assert_eq!(
            f.evaluate(&[0.5, 2.0]).unwrap_err(),
            Error::OutOfDomain { coordinate: 1 }
        );
    }

    #[test]
    fn affine_json_round_trip() {
        let json = r#"{
            "base": {"rows": 1, "cols": 1, "entries": [[0.0, 0.0]]},
            "coefficients": [{"rows": 1, "cols": 1, "entries": [[1.0, 0.0]]}],
            "hermitian": true
        }"#;
        let payload: AffineFamily = serde_json::from_str(json).unwrap();
        let f = payload.into_family().unwrap();
        assert!(f.is_hermitian());
        assert_eq!(f.evaluate(&[2.5]).unwrap()[(0, 0)], C64::new(2.5, 0.0));
    }
}
