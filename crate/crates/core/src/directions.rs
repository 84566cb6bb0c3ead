//! Reproducible direction sets on the unit sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 42;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = f64::from(base);
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % u64::from(base)) as f64 * inv;
        i /= u64::from(base);
        inv /= b;
    }
    out
}

/// `count` unit vectors in `dim` dimensions.
///
/// Points of a Halton sequence, shifted by a seed-dependent random offset
/// (Cranley–Patterson rotation), are pushed through the inverse normal CDF
/// and normalized, giving a low-discrepancy sample of the sphere.
pub fn sphere_directions(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || dim > PRIMES.len() {
        return Err(Error::InvalidArgument(format!(
            "sphere sampling supports 1..={} dimensions, got {dim}",
            PRIMES.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");

    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let g: Vec<f64> = (0..dim)
            .map(|k| {
                let u = (radical_inverse(i, PRIMES[k]) + shift[k]).fract();
                normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
            })
            .collect();
        i += 1;
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            out.push(g.into_iter().map(|x| x / norm).collect());
        }
    }
    Ok(out)
}

/// The `dim` coordinate axes `e₁, …, e_dim`.
pub fn coordinate_axes(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|k| (0..dim).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_norm_and_deterministic() {
        let a = sphere_directions(4, 64, DEFAULT_SEED).unwrap();
        let b = sphere_directions(4, 64, DEFAULT_SEED).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        for d in &a {
            let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-14);
        }
        assert_ne!(a, sphere_directions(4, 64, 7).unwrap());
    }

    #[test]
    fn covers_the_circle() {
        let ds = sphere_directions(2, 256, 1).unwrap();
        // every 45-degree sector gets hit
        let mut hits = [0usize; 8];
        for d in &ds {
            let angle = d[1].atan2(d[0]) + std::f64::consts::PI;
            hits[((angle / (std::f64::consts::PI / 4.0)) as usize).min(7)] += 1;
        }
        assert!(hits.iter().all(|&h| h > 10), "{hits:?}");
    }

    #[test]
    fn axes() {
        assert_eq!(coordinate_axes(2), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(sphere_directions(0, 1, 0).is_err());
    }
}
