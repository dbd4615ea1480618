use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{inner, ComplexMatrix};

/// QR factorization by modified Gram–Schmidt with one re-orthogonalization
/// pass. Returns `(Q, R)` with `R` upper triangular.
///
/// Panics if the columns are linearly dependent to working precision.
pub fn qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "qr needs rows >= cols");
    let mut q = ComplexMatrix::zeros(m, n);
    let mut r = ComplexMatrix::zeros(n, n);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = a.column(j);
        for _pass in 0..2 {
            for (k, qk) in basis.iter().enumerate() {
                let proj = inner(qk, &v);
                r[(k, j)] += proj;
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= proj * qi;
                }
            }
        }
        let nrm = super::matrix::norm(&v);
        assert!(nrm > 1e-300, "rank-deficient input to qr");
        r[(j, j)] = Complex64::new(nrm, 0.0);
        for vi in &mut v {
            *vi /= nrm;
        }
        q.set_column(j, &v);
        basis.push(v);
    }
    (q, r)
}

/// Haar-distributed `dim × dim` unitary.
///
/// Complex Ginibre matrix, QR, then each column of `Q` multiplied by the
/// phase of the matching diagonal entry of `R`.
pub fn haar_random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "dimension must be positive");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    });
    let (mut q, r) = qr(&z);
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = d / d.norm();
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random pure state (first column of a Haar unitary, equivalently a
/// normalized complex Gaussian vector).
pub fn haar_random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    let nrm = super::matrix::norm(&v);
    for z in &mut v {
        *z /= nrm;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::matrix::is_unitary;
    use crate::rng::seeded;

    #[test]
    fn dim_one_is_a_phase() {
        let mut rng = seeded(3);
        let u = haar_random_unitary(1, &mut rng);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn samples_are_unitary() {
        let mut rng = seeded(11);
        for dim in [2, 4, 8, 16] {
            let u = haar_random_unitary(dim, &mut rng);
            assert!(is_unitary(&u, 1e-10).unitary, "dim {dim}");
        }
    }

    #[test]
    fn seed_is_reproducible() {
        let a = haar_random_unitary(4, &mut seeded(42));
        let b = haar_random_unitary(4, &mut seeded(42));
        assert_eq!(a, b);
        let c = haar_random_unitary(4, &mut seeded(43));
        assert_ne!(a, c);
    }

    #[test]
    fn qr_reconstructs() {
        let mut rng = seeded(5);
        let a = haar_random_unitary(4, &mut rng).scale(Complex64::new(2.0, 1.0));
        let (q, r) = qr(&a);
        assert!(q.matmul(&r).max_abs_diff(&a) < 1e-13);
        for i in 0..4 {
            for j in 0..i {
                assert_eq!(r[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn random_state_is_normalized() {
        let v = haar_random_state(4, &mut seeded(9));
        assert!((super::super::matrix::norm(&v) - 1.0).abs() < 1e-14);
    }
}
