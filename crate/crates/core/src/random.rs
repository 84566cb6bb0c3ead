//! Random test matrices with prescribed spectra.

use rand::Rng;

use crate::matrix::{ComplexMatrix, C64};

/// Entries with real and imaginary parts uniform in `[-1, 1]`.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
    })
}

/// Hermitian matrix with real and imaginary parts uniform in `[-1, 1]`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = C64::new(rng.gen_range(-1.0..=1.0), 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

/// Unitary matrix from modified Gram–Schmidt on a random complex matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut q = random_complex(rng, n, n);
    for j in 0..n {
        for k in 0..j {
            let proj: C64 = (0..n).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
            for i in 0..n {
                let qik = q[(i, k)];
                q[(i, j)] -= proj * qik;
            }
        }
        let norm = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    q
}

/// `P diag(spectrum) P*` for a random unitary `P`.
pub fn hermitian_with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> ComplexMatrix {
    let n = spectrum.len();
    let p = random_unitary(rng, n);
    let pd = ComplexMatrix::from_fn(n, n, |i, j| p[(i, j)] * spectrum[j]);
    pd.matmul(&p.adjoint()).hermitian_part()
}

/// `U Σ V*` (rows×cols) with the given singular values on the diagonal of `Σ`.
pub fn matrix_with_singular_values<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    sigma: &[f64],
) -> ComplexMatrix {
    assert_eq!(
        sigma.len(),
        rows.min(cols),
        "need min(rows, cols) singular values"
    );
    let u = random_unitary(rng, rows);
    let v = random_unitary(rng, cols);
    let s = ComplexMatrix::from_fn(rows, cols, |i, j| {
        if i == j {
            C64::new(sigma[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    u.matmul(&s).matmul(&v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_unitary(&mut rng, 6);
        let gram = p.adjoint_mul(&p);
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(6)) < 1e-14);
    }

    #[test]
    fn hermitian_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_hermitian(&mut rng, 5);
        assert_eq!(a, a.adjoint());
        let b = hermitian_with_spectrum(&mut rng, &[2.0, 2.0, 1.0]);
        assert_eq!(b, b.adjoint());
        assert!((b.trace().unwrap().re - 5.0).abs() < 1e-13);
    }
}
