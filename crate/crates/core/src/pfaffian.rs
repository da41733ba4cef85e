//! Pfaffians of complex antisymmetric matrices.
//!
//! Parlett–Reid elimination with partial pivoting: the matrix is reduced to
//! tridiagonal skew form by Gauss transformations applied symmetrically, and
//! the Pfaffian is the product of the odd super-diagonal entries.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance on `A + Aᵀ` accepted as antisymmetric.
pub const ANTISYMMETRY_TOL: f64 = 1e-10;

/// Pfaffian of an antisymmetric matrix; the empty matrix has Pfaffian 1.
pub fn pfaffian(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::arg(format!(
            "pfaffian needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n % 2 == 1 {
        return Err(Error::arg(format!(
            "pfaffian needs an even dimension, got {n}"
        )));
    }
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            asym = asym.max((a[(i, j)] + a[(j, i)]).norm());
        }
    }
    if asym > ANTISYMMETRY_TOL * scale.max(1.0) {
        return Err(Error::arg(format!(
            "matrix is not antisymmetric (max |A + Aᵀ| = {asym:e})"
        )));
    }
    // Row-major copy; the elimination only touches the lower-right block.
    let mut work: Vec<Complex64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            work.push(a[(i, j)]);
        }
    }
    pfaffian_in_place(&mut work, n, scale)
}

/// Pfaffian of a row-major `n × n` antisymmetric buffer, destroyed on return.
/// `scale` is the largest entry magnitude and only feeds the diagnostics.
pub(crate) fn pfaffian_in_place(a: &mut [Complex64], n: usize, scale: f64) -> Result<Complex64> {
    debug_assert_eq!(a.len(), n * n);
    let mut value = Complex64::new(1.0, 0.0);
    let mut tau = vec![Complex64::new(0.0, 0.0); n];
    let mut k = 0;
    while k + 1 < n {
        // Pivot: largest entry in column k below the diagonal.
        let mut kp = k + 1;
        let mut best = a[(k + 1) * n + k].norm();
        for r in k + 2..n {
            let v = a[r * n + k].norm();
            if v > best {
                best = v;
                kp = r;
            }
        }
        if kp != k + 1 {
            for c in k..n {
                a.swap((k + 1) * n + c, kp * n + c);
            }
            for r in k..n {
                a.swap(r * n + k + 1, r * n + kp);
            }
            value = -value;
        }
        let pivot = a[k * n + k + 1];
        if pivot.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        value *= pivot;
        if k + 2 < n {
            for (j, t) in tau.iter_mut().enumerate().take(n).skip(k + 2) {
                *t = a[k * n + j] / pivot;
            }
            // A[i, j] += tau_i A[j, k+1] − A[i, k+1] tau_j on the trailing block.
            for i in k + 2..n {
                let ti = tau[i];
                let ai = a[i * n + k + 1];
                let row = i * n;
                for j in k + 2..n {
                    let update = ti * a[j * n + k + 1] - ai * tau[j];
                    a[row + j] += update;
                }
            }
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::PfaffianBreakdown {
                step: k / 2,
                pivot_ratio: pivot.norm() / scale.max(f64::MIN_POSITIVE),
                detail: "non-finite running product".into(),
            });
        }
        k += 2;
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_antisymmetric(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = -z;
            }
        }
        m
    }

    #[test]
    fn small_cases() {
        assert_eq!(pfaffian(&DMatrix::zeros(0, 0)).unwrap(), c(1.0, 0.0));
        let a = c(0.3, -1.7);
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), a, -a, c(0.0, 0.0)]);
        assert_eq!(pfaffian(&m).unwrap(), a);

        let (x, y) = (c(2.0, 1.0), c(-0.5, 3.0));
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = x;
        m[(1, 0)] = -x;
        m[(2, 3)] = y;
        m[(3, 2)] = -y;
        assert_relative_eq!((pfaffian(&m).unwrap() - x * y).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn four_by_four_formula() {
        // Pf = a01 a23 − a02 a13 + a03 a12
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_antisymmetric(4, &mut rng);
        let expected = m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)];
        assert_relative_eq!(
            (pfaffian(&m).unwrap() - expected).norm(),
            0.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn square_matches_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_antisymmetric(8, &mut rng);
        let pf = pfaffian(&m).unwrap();
        let det = m.clone().determinant();
        assert!((pf * pf - det).norm() <= 1e-8 * det.norm());
    }

    #[test]
    fn singular_matrix_gives_zero() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = c(-1.0, 0.0);
        assert_eq!(pfaffian(&m).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            pfaffian(&DMatrix::zeros(3, 3)),
            Err(Error::Argument(_))
        ));
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = c(1.0, 0.0);
        assert!(matches!(pfaffian(&m), Err(Error::Argument(_))));
        assert!(pfaffian(&DMatrix::zeros(2, 4)).is_err());
    }
}
