//! Directional derivatives of ordered eigenvalues and singular values of
//! parameterized complex matrices.
//!
//! Ordered eigenvalues `λ₁(x) ≥ … ≥ λ_n(x)` of a Hermitian family `A(x)`
//! are continuous but not differentiable where eigenvalues coalesce. They do
//! have one-sided directional derivatives everywhere, and this crate
//! computes them exactly from a small compressed matrix built on the
//! eigenspace of the coalescing cluster:
//!
//! ```
//! use spectral_sens::{eig_directional_derivative, kato_family};
//!
//! // A(x) = [[x₁, i·x₂], [−i·x₂, −x₁]] has eigenvalues ±‖x‖₂.
//! let family = kato_family();
//! let up = eig_directional_derivative(&family, &[0.0, 0.0], 1, &[0.6, 0.8], None)?;
//! let down = eig_directional_derivative(&family, &[0.0, 0.0], 2, &[0.6, 0.8], None)?;
//! assert!((up.derivative - 1.0).abs() < 1e-12);
//! assert!((down.derivative + 1.0).abs() < 1e-12);
//! # Ok::<(), spectral_sens::Error>(())
//! ```
//!
//! Singular values are handled through the Hermitian embedding
//! `[[0, A], [A*, 0]]` ([`deriv_sv`]), and [`ikramov`] applies the machinery
//! to the structured block matrix `Q(ξ)`. The [`fd`] module supplies an
//! independent finite-difference reference.
//!
//! The guide in `book/` walks through each of these in more depth; its code
//! listings are compiled and run as doctests of this crate.

pub mod cluster;
pub mod deriv_eig;
pub mod deriv_sv;
pub mod directions;
pub mod error;
pub mod families;
pub mod fd;
pub mod hermitian;
pub mod ikramov;
pub mod matrix;
pub mod random;

pub use cluster::{cluster_gap_guard, default_cluster_tol, locate_cluster, ClusterIndex};
pub use deriv_eig::{
    build_f_prime, cluster_directional_derivatives, cluster_sum_gradient, eig_directional_derivative,
    eigvec_block, ensure_unit, normalize, DerivativePath, DerivativeReport,
};
pub use deriv_sv::{
    sv_cluster_sum_gradient, sv_decomposition, sv_derivative_reduced, sv_directional_derivative,
    wielandt_embed, SingularDecomposition,
};
pub use error::{Error, Result};
pub use families::{fd_partial_check, kato_family, make_affine, AffineFamily, BoxDomain, MatrixFamily};
pub use fd::{fd_directional, fd_gradient, FdEstimate};
pub use hermitian::{hermitian_eig, hermiticity_defect, trace_hermitian, SpectralDecomposition};
pub use matrix::{ComplexMatrix, C64};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/clusters.md")]
    mod clusters {}
    #[doc = include_str!("../../../book/src/eigenvalue-derivatives.md")]
    mod eigenvalue_derivatives {}
    #[doc = include_str!("../../../book/src/singular-values.md")]
    mod singular_values {}
    #[doc = include_str!("../../../book/src/critical-points.md")]
    mod critical_points {}
    #[doc = include_str!("../../../book/src/finite-differences.md")]
    mod finite_differences {}
    #[doc = include_str!("../../../book/src/eigensolver.md")]
    mod eigensolver {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
