//! First-order analysis of `f(ξ) = σ_{3n−2}(Q(ξ))` at a candidate maximizer.
//!
//! For a square `A` (n ≥ 3) and `ξ ∈ ℝ⁴`,
//!
//! ```text
//!        ⎡ A   ξ₁I   (ξ₃+iξ₄)I ⎤
//! Q(ξ) = ⎢ 0    A       ξ₂I    ⎥
//!        ⎣ 0    0        A     ⎦
//! ```
//!
//! Let `σ₀ = f(ξ⁰)` sit at position `p` of a cluster of multiplicity `m`
//! (`p` members at or before rank `3n−2`, `q = m − p` after it) and let
//! `μ₁(d) ≥ … ≥ μ_m(d)` be the eigenvalues of the compressed derivative
//! `F′(d)`. Then `f′(ξ⁰; d) = μ_p(d)` and, because `F′(−d) = −F′(d)`,
//! `f′(ξ⁰; −d) = −μ_{m−p+1}(d)`.
//!
//! At a local maximum both are `≤ 0`. When `p ≤ m − p + 1` the ordering
//! `μ_p ≥ μ_{m−p+1}` squeezes both to zero, so every directional derivative
//! vanishes ([`CriticalCase::Decisive`]). Otherwise the signs do not force
//! anything and only the raw data is reported ([`CriticalCase::Dubious`]).
//!
//! The cluster sum `t(ξ)` is differentiable; `H(ξ) = t(ξ) − mσ₀` vanishes at
//! `ξ⁰` and `Σ_i μ_i(d) = ∇H(ξ⁰)·d` for every `d`.

use serde::{Deserialize, Serialize};

use crate::deriv_eig::{compress, ensure_unit, sorted_eigenvalues, LocalCluster};
use crate::deriv_sv::{
    local_sv_cluster, sv_cluster_sum_gradient, sv_decomposition, sv_directional_derivative, wielandt_embed,
};
use crate::error::{Error, Result};
use crate::families::{make_affine, MatrixFamily};
use crate::hermitian::trace_hermitian;
use crate::matrix::{ComplexMatrix, C64};

/// `Q(ξ)` for a square `A` with `n ≥ 3`.
pub fn build_q(a: &ComplexMatrix, xi: &[f64]) -> Result<ComplexMatrix> {
    let n = check_a(a)?;
    if xi.len() != 4 {
        return Err(Error::Dimension(format!(
            "ξ needs 4 coordinates, got {}",
            xi.len()
        )));
    }
    let mut q = ComplexMatrix::zeros(3 * n, 3 * n);
    for b in 0..3 {
        q.set_block(b * n, b * n, a);
    }
    let off = [
        (0, n, C64::new(xi[0], 0.0)),
        (n, 2 * n, C64::new(xi[1], 0.0)),
        (0, 2 * n, C64::new(xi[2], xi[3])),
    ];
    for (row, col, z) in off {
        for i in 0..n {
            q[(row + i, col + i)] = z;
        }
    }
    Ok(q)
}

fn check_a(a: &ComplexMatrix) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "A must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() < 3 {
        return Err(Error::Dimension(format!(
            "A must be at least 3x3, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(a.rows())
}

/// Scaled identity placed in one block of a 3n×3n zero matrix.
fn block_identity(n: usize, row: usize, col: usize, z: C64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        m[(row * n + i, col * n + i)] = z;
    }
    m
}

/// `ξ ↦ Q(ξ)` as a four-parameter affine family.
pub fn q_family(a: &ComplexMatrix) -> Result<MatrixFamily> {
    let n = check_a(a)?;
    let one = C64::new(1.0, 0.0);
    make_affine(
        build_q(a, &[0.0; 4])?,
        vec![
            block_identity(n, 0, 1, one),
            block_identity(n, 1, 2, one),
            block_identity(n, 0, 2, one),
            block_identity(n, 0, 2, C64::new(0.0, 1.0)),
        ],
    )
}

/// The singular value rank `3n − 2` studied here.
pub fn target_rank(n: usize) -> usize {
    3 * n - 2
}

/// `f(ξ) = σ_{3n−2}(Q(ξ))`.
pub fn f_value(a: &ComplexMatrix, xi: &[f64]) -> Result<f64> {
    let q = build_q(a, xi)?;
    Ok(sv_decomposition(&q)?.sigma[target_rank(a.rows()) - 1])
}

/// Whether the sign argument settles the case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalCase {
    /// `p ≤ m − (p − 1)`.
    Decisive,
    /// `p > m − (p − 1)`.
    Dubious,
}

pub fn critical_case(p: usize, m: usize) -> CriticalCase {
    assert!(1 <= p && p <= m, "need 1 <= p <= m");
    if p <= m - (p - 1) {
        CriticalCase::Decisive
    } else {
        CriticalCase::Dubious
    }
}

/// Per-direction data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub d: Vec<f64>,
    /// Eigenvalues of `F′(d)`, non-increasing.
    pub mu: Vec<f64>,
    /// `f′(ξ⁰; d) = μ_p(d)`.
    pub f_fwd: f64,
    /// `f′(ξ⁰; −d) = −μ_{m−p+1}(d)`.
    pub f_bwd: f64,
    /// `f′(ξ⁰; −d)` computed from scratch along `−d`, when available.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f_bwd_direct: Option<f64>,
    /// `|f_bwd − f_bwd_direct|`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reflection_delta: Option<f64>,
    /// `Σ μ_i(d) = trace F′(d)`.
    pub trace: f64,
    /// Whether `F′(−d)` came out as exactly `−F′(d)`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub odd_exact: Option<bool>,
}

impl DirectionRecord {
    /// Reads `f_fwd`, `f_bwd` and the trace off a sorted `mu` list.
    pub fn from_mu(d: Vec<f64>, mu: Vec<f64>, p: usize) -> DirectionRecord {
        let m = mu.len();
        assert!(1 <= p && p <= m, "need 1 <= p <= m");
        DirectionRecord {
            d,
            f_fwd: mu[p - 1],
            f_bwd: -mu[m - p],
            trace: mu.iter().sum(),
            mu,
            f_bwd_direct: None,
            reflection_delta: None,
            odd_exact: None,
        }
    }
}

/// A sampled direction that contradicts the local-maximum hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refutation {
    pub direction_index: usize,
    pub f_fwd: f64,
    pub f_bwd: f64,
}

/// Outcome of the decisive case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    /// All sampled one-sided derivatives vanish to `check_tol`.
    pub derivatives_vanish: bool,
    pub refutations: Vec<Refutation>,
}

/// Full report for a candidate maximizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointAnalysis {
    pub xi0: Vec<f64>,
    pub n: usize,
    pub rank: usize,
    pub sigma0: f64,
    pub p: usize,
    pub q: usize,
    pub m: usize,
    pub case: CriticalCase,
    pub check_tol: f64,
    pub per_direction: Vec<DirectionRecord>,
    /// Directions with `f′ > check_tol` either way; each one violates the hypothesis outright.
    pub ascent_directions: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conclusion: Option<Conclusion>,
    pub h_value: f64,
    pub h_gradient: Vec<f64>,
    pub trace_sums: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_reflection_delta: Option<f64>,
}

/// `1e-7 · max(1, σ₀)`.
pub fn check_tol(sigma0: f64) -> f64 {
    1e-7 * sigma0.max(1.0)
}

/// Sign bookkeeping shared by real and synthetic spectra.
///
/// Returns the case, the ascent directions and (decisive case only) the
/// conclusion.
pub fn assess_records(
    p: usize,
    m: usize,
    records: &[DirectionRecord],
    check_tol: f64,
) -> (CriticalCase, Vec<usize>, Option<Conclusion>) {
    let case = critical_case(p, m);
    let ascent = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.f_fwd > check_tol || r.f_bwd > check_tol)
        .map(|(k, _)| k)
        .collect();
    let conclusion = (case == CriticalCase::Decisive).then(|| {
        let refutations: Vec<Refutation> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.f_fwd.abs() > check_tol || r.f_bwd.abs() > check_tol)
            .map(|(k, r)| Refutation {
                direction_index: k,
                f_fwd: r.f_fwd,
                f_bwd: r.f_bwd,
            })
            .collect();
        Conclusion {
            derivatives_vanish: refutations.is_empty(),
            refutations,
        }
    });
    (case, ascent, conclusion)
}

/// Shared state at `ξ⁰`.
struct Anchor {
    family: MatrixFamily,
    local: LocalCluster,
    rank: usize,
}

impl Anchor {
    fn new(a: &ComplexMatrix, xi0: &[f64], cluster_tol: Option<f64>) -> Result<Anchor> {
        let n = check_a(a)?;
        let family = q_family(a)?;
        let rank = target_rank(n);
        let local = local_sv_cluster(&family.evaluate(xi0)?, rank, cluster_tol)?;
        Ok(Anchor { family, local, rank })
    }

    fn p(&self) -> usize {
        self.local.cluster.i
    }

    /// `F′(d)` and the norm of the embedded derivative it compresses.
    fn f_prime(&self, xi0: &[f64], d: &[f64]) -> Result<(ComplexMatrix, f64)> {
        let g = wielandt_embed(&self.family.directional_partial(xi0, d)?);
        Ok((compress(&self.local.basis, &g), g.frobenius_norm()))
    }

    fn analyze(&self, xi0: &[f64], d: &[f64], cluster_tol: Option<f64>) -> Result<DirectionRecord> {
        ensure_unit(d)?;
        let (fp, scale) = self.f_prime(xi0, d)?;
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        let (fp_neg, _) = self.f_prime(xi0, &neg)?;
        let mu = sorted_eigenvalues(&fp, scale)?;
        let mut record = DirectionRecord::from_mu(d.to_vec(), mu, self.p());
        let direct = sv_directional_derivative(&self.family, xi0, self.rank, &neg, cluster_tol)?;
        record.f_bwd_direct = Some(direct.derivative);
        record.reflection_delta = Some((record.f_bwd - direct.derivative).abs());
        record.odd_exact = Some(fp_neg == -&fp);
        Ok(record)
    }
}

/// `f′(ξ⁰; d)` and `f′(ξ⁰; −d)` from one `F′(d)`, cross-checked against a
/// direct evaluation along `−d`.
pub fn analyze_direction_pair(
    a: &ComplexMatrix,
    xi0: &[f64],
    d: &[f64],
    cluster_tol: Option<f64>,
) -> Result<DirectionRecord> {
    Anchor::new(a, xi0, cluster_tol)?.analyze(xi0, d, cluster_tol)
}

/// Value and gradient of `H(ξ) = t(ξ) − mσ₀` at `ξ⁰`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelFunctionReport {
    pub sigma0: f64,
    pub m: usize,
    /// Cluster sum `t(ξ⁰)`.
    pub t_value: f64,
    pub h_value: f64,
    pub h_gradient: Vec<f64>,
}

pub fn level_function_report(
    a: &ComplexMatrix,
    xi0: &[f64],
    cluster_tol: Option<f64>,
) -> Result<LevelFunctionReport> {
    let anchor = Anchor::new(a, xi0, cluster_tol)?;
    level_from_anchor(&anchor, xi0, cluster_tol)
}

fn level_from_anchor(anchor: &Anchor, xi0: &[f64], cluster_tol: Option<f64>) -> Result<LevelFunctionReport> {
    let c = anchor.local.cluster;
    let eig = &anchor.local.decomposition.eigenvalues;
    let t_value: f64 = eig[c.lo - 1..c.hi].iter().sum();
    let h_gradient = sv_cluster_sum_gradient(&anchor.family, xi0, anchor.rank, cluster_tol)?;
    Ok(LevelFunctionReport {
        sigma0: c.value,
        m: c.r,
        t_value,
        h_value: t_value - c.r as f64 * c.value,
        h_gradient,
    })
}

/// Analyses `ξ⁰` against every direction in `directions`.
///
/// `ξ⁰` is taken as a candidate maximizer; the report tests necessary
/// conditions and lists contradicting directions but never certifies
/// maximality.
pub fn classify_critical_point(
    a: &ComplexMatrix,
    xi0: &[f64],
    directions: &[Vec<f64>],
    cluster_tol: Option<f64>,
) -> Result<CriticalPointAnalysis> {
    if directions.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one direction is required".into(),
        ));
    }
    let anchor = Anchor::new(a, xi0, cluster_tol)?;
    let records = directions
        .iter()
        .map(|d| anchor.analyze(xi0, d, cluster_tol))
        .collect::<Result<Vec<_>>>()?;
    let level = level_from_anchor(&anchor, xi0, cluster_tol)?;
    let c = anchor.local.cluster;
    let tol = check_tol(c.value);
    let (case, ascent_directions, conclusion) = assess_records(c.i, c.r, &records, tol);
    let max_reflection_delta = records
        .iter()
        .filter_map(|r| r.reflection_delta)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    Ok(CriticalPointAnalysis {
        xi0: xi0.to_vec(),
        n: a.rows(),
        rank: anchor.rank,
        sigma0: c.value,
        p: c.i,
        q: c.j,
        m: c.r,
        case,
        check_tol: tol,
        trace_sums: records.iter().map(|r| r.trace).collect(),
        per_direction: records,
        ascent_directions,
        conclusion,
        h_value: level.h_value,
        h_gradient: level.h_gradient,
        max_reflection_delta,
    })
}

/// Compressed derivative `F′(d)` at `ξ⁰` (m×m), exposed for inspection.
pub fn q_f_prime(
    a: &ComplexMatrix,
    xi0: &[f64],
    d: &[f64],
    cluster_tol: Option<f64>,
) -> Result<ComplexMatrix> {
    ensure_unit(d)?;
    Ok(Anchor::new(a, xi0, cluster_tol)?.f_prime(xi0, d)?.0)
}

/// `Σ_i μ_i(d)`, i.e. `trace F′(d)`.
pub fn f_prime_trace(f_prime: &ComplexMatrix) -> Result<f64> {
    trace_hermitian(&f_prime.hermitian_part())
}

/// Settings for [`coarse_maximizer`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximizerConfig {
    /// Grid covers `[-radius, radius]⁴`.
    pub radius: f64,
    /// Grid points per axis (≥ 2).
    pub grid_points: usize,
    /// Pattern search stops once the step falls below this.
    pub min_step: f64,
    pub max_evaluations: usize,
}

impl Default for MaximizerConfig {
    fn default() -> Self {
        MaximizerConfig {
            radius: 2.0,
            grid_points: 5,
            min_step: 1e-9,
            max_evaluations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizerResult {
    pub xi: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Grid scan of `f` followed by compass pattern search from the best point.
pub fn coarse_maximizer(a: &ComplexMatrix, config: &MaximizerConfig) -> Result<MaximizerResult> {
    check_a(a)?;
    if config.grid_points < 2 || config.radius.is_nan() || config.radius <= 0.0 {
        return Err(Error::InvalidArgument(
            "grid needs >= 2 points and a positive radius".into(),
        ));
    }
    let g = config.grid_points;
    let h = 2.0 * config.radius / (g - 1) as f64;
    let coord = |k: usize| -config.radius + h * k as f64;

    let mut evaluations = 0;
    let mut best = (vec![0.0; 4], f64::NEG_INFINITY);
    for idx in 0..g.pow(4) {
        let xi = [
            coord(idx % g),
            coord(idx / g % g),
            coord(idx / (g * g) % g),
            coord(idx / (g * g * g)),
        ];
        let v = f_value(a, &xi)?;
        evaluations += 1;
        if v > best.1 {
            best = (xi.to_vec(), v);
        }
    }

    let (mut xi, mut value) = best;
    let mut step = h / 2.0;
    while step >= config.min_step && evaluations < config.max_evaluations {
        let mut improved = false;
        for k in 0..4 {
            for sign in [1.0, -1.0] {
                let mut trial = xi.clone();
                trial[k] += sign * step;
                let v = f_value(a, &trial)?;
                evaluations += 1;
                if v > value {
                    xi = trial;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(MaximizerResult {
        xi,
        value,
        evaluations,
    })
}
