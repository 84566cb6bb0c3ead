//! Finite-difference reference values for directional derivatives and gradients.
//!
//! This module only ever evaluates the scalar function it is given; it knows
//! nothing about eigenvectors or compressed matrices, so it can serve as an
//! independent check on the analytic derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of step halvings.
pub const DEFAULT_LEVELS: usize = 6;

/// Spread (relative to `max(1, |value|)`) above which an estimate is untrusted.
pub const TRUST_THRESHOLD: f64 = 1e-3;

/// `1e-3 · max(1, ‖x₀‖₂)`.
pub fn default_step(x0: &[f64]) -> f64 {
    1e-3 * x0.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0)
}

/// A Richardson-extrapolated difference quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdEstimate {
    /// Quotient at the smallest step.
    pub value: f64,
    /// `(h, quotient)` pairs, steps strictly decreasing.
    pub step_sequence: Vec<(f64, f64)>,
    pub extrapolated: f64,
    /// Spread of the last three diagonal extrapolants.
    pub stability_indicator: f64,
}

impl FdEstimate {
    pub fn is_trusted(&self) -> bool {
        self.stability_indicator <= TRUST_THRESHOLD * self.extrapolated.abs().max(1.0)
    }
}

/// Neville tableau for an error expansion in powers of `ratio^{-k}`:
/// `factor` is `2` for `c₁h + c₂h² + …` and `4` for `c₂h² + c₄h⁴ + …`.
fn richardson(samples: &[f64], factor: f64) -> Vec<f64> {
    let mut prev: Vec<f64> = Vec::new();
    let mut diagonal = Vec::with_capacity(samples.len());
    for (k, &s) in samples.iter().enumerate() {
        let mut row = vec![s];
        let mut pow = 1.0;
        for j in 1..=k {
            pow *= factor;
            let v = (pow * row[j - 1] - prev[j - 1]) / (pow - 1.0);
            row.push(v);
        }
        diagonal.push(row[k]);
        prev = row;
    }
    diagonal
}

fn spread(xs: &[f64]) -> f64 {
    let tail = &xs[xs.len().saturating_sub(3)..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

fn check_steps(h0: f64, levels: usize, min_levels: usize) -> Result<()> {
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "initial step must be positive, got {h0}"
        )));
    }
    if levels < min_levels {
        return Err(Error::InvalidArgument(format!(
            "need at least {min_levels} levels, got {levels}"
        )));
    }
    Ok(())
}

fn finite(v: f64, step: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteEvaluation { step })
    }
}

/// One-sided estimate of `lim_{t→0⁺} (φ(x₀ + t d) − φ(x₀)) / t`.
///
/// Steps are `h0 · 2^{−k}` for `k < levels`; extrapolation assumes an error
/// of the form `c₁h + c₂h² + …`.
pub fn fd_directional<F>(phi: F, x0: &[f64], d: &[f64], h0: f64, levels: usize) -> Result<FdEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    check_steps(h0, levels, 3)?;
    if d.len() != x0.len() {
        return Err(Error::Dimension("direction and point lengths differ".into()));
    }
    let base = finite(phi(x0), 0.0)?;
    let mut step_sequence = Vec::with_capacity(levels);
    let mut x = vec![0.0; x0.len()];
    let mut h = h0;
    for _ in 0..levels {
        for ((xi, &x0i), &di) in x.iter_mut().zip(x0).zip(d) {
            *xi = x0i + h * di;
        }
        let q = (finite(phi(&x), h)? - base) / h;
        step_sequence.push((h, q));
        h *= 0.5;
    }
    let quotients: Vec<f64> = step_sequence.iter().map(|&(_, q)| q).collect();
    let diagonal = richardson(&quotients, 2.0);
    let extrapolated = *diagonal.last().expect("levels >= 3");
    Ok(FdEstimate {
        value: *quotients.last().expect("levels >= 3"),
        step_sequence,
        extrapolated: finite(extrapolated, h)?,
        stability_indicator: spread(&diagonal),
    })
}

/// Central-difference gradient, extrapolated in `h²`.
pub fn fd_gradient<F>(phi: F, x0: &[f64], h0: f64, levels: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    check_steps(h0, levels, 1)?;
    let mut grad = Vec::with_capacity(x0.len());
    let mut x = x0.to_vec();
    for j in 0..x0.len() {
        let mut quotients = Vec::with_capacity(levels);
        let mut h = h0;
        for _ in 0..levels {
            x[j] = x0[j] + h;
            let fwd = finite(phi(&x), h)?;
            x[j] = x0[j] - h;
            let bwd = finite(phi(&x), h)?;
            quotients.push((fwd - bwd) / (2.0 * h));
            h *= 0.5;
        }
        x[j] = x0[j];
        grad.push(*richardson(&quotients, 4.0).last().expect("levels >= 1"));
    }
    Ok(grad)
}
