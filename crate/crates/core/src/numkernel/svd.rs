use num_complex::Complex64;

use super::matrix::{axpy, dotc, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Singular values in nonincreasing order, by one-sided Jacobi rotations.
///
/// Works on the columns of `A` (or of `Aᴴ` when `A` is wide), which keeps
/// relative accuracy for small singular values.
pub fn svd_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    // Column-major working copy of the tall orientation.
    let tall = if a.cols() > a.rows() {
        a.adjoint()
    } else {
        a.clone()
    };
    let m = tall.rows();
    let n = tall.cols();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| tall.column(j)).collect();
    let mut norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
        .collect();

    let tol = f64::EPSILON * (m as f64).sqrt();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = norms[i];
                let beta = norms[j];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dotc(&cols[i], &cols[j]);
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase out of column j, then apply a real rotation.
                let phase = gamma / g;
                for z in cols[j].iter_mut() {
                    *z *= phase.conj();
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(j);
                let ci = &mut left[i];
                let cj = &mut right[0];
                for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
                    let xi = *x;
                    let yj = *y;
                    *x = xi * c - yj * s;
                    *y = xi * s + yj * c;
                }
                norms[i] = ci.iter().map(|z| z.norm_sqr()).sum();
                norms[j] = cj.iter().map(|z| z.norm_sqr()).sum();
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = norms.into_iter().map(f64::sqrt).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    svd_values(a).first().copied().unwrap_or(0.0)
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.frobenius_norm()
}

/// Orthonormal basis for the column space of a full-column-rank matrix.
///
/// Classical Gram-Schmidt with one full reorthogonalization pass per column.
pub fn qr_orthonormalize(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = a.rows();
    let n = a.cols();
    if n > m {
        return Err(Error::RankDeficient(m));
    }
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = a.column(j);
        let original: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for _pass in 0..2 {
            for qk in &q {
                let r = dotc(qk, &v);
                axpy(&mut v, -r, qk);
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-13 * original.max(scale * 1e-3) || norm == 0.0 {
            return Err(Error::RankDeficient(j));
        }
        for z in v.iter_mut() {
            *z /= norm;
        }
        q.push(v);
    }
    Ok(ComplexMatrix::from_fn(m, n, |i, j| q[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn identity_and_nilpotent() {
        assert_eq!(svd_values(&ComplexMatrix::identity(3)), vec![1.0, 1.0, 1.0]);
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]);
        assert!((operator_norm(&a) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn frobenius_identity_random_16() {
        let a = random(16, 16, 11);
        let sv = svd_values(&a);
        let sum_sq: f64 = sv.iter().map(|s| s * s).sum();
        let f2 = frobenius_norm(&a).powi(2);
        assert!((sum_sq - f2).abs() <= 1e-12 * f2);
        assert!(sv.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn wide_and_tall_agree() {
        let a = random(5, 9, 3);
        let s1 = svd_values(&a);
        let s2 = svd_values(&a.adjoint());
        assert_eq!(s1.len(), 5);
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn known_diagonal_values() {
        let d = ComplexMatrix::diagonal(&[
            Complex64::new(0.0, 3.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.5, 0.0),
        ]);
        let sv = svd_values(&d);
        assert!(
            (sv[0] - 3.0).abs() < 1e-15
                && (sv[1] - 1.0).abs() < 1e-15
                && (sv[2] - 0.5).abs() < 1e-15
        );
    }

    #[test]
    fn qr_columns_are_orthonormal_and_span() {
        let a = random(12, 5, 5);
        let q = qr_orthonormalize(&a).unwrap();
        let g = q.adjoint_matmul(&q).unwrap();
        assert!(g.sub(&ComplexMatrix::identity(5)).unwrap().max_abs() < 1e-12);
        // a = q qᴴ a
        let proj = q.matmul(&q.adjoint_matmul(&a).unwrap()).unwrap();
        assert!(proj.sub(&a).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn qr_rejects_dependent_columns() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[1.0, 2.0], &[0.0, 0.0]]);
        assert!(matches!(
            qr_orthonormalize(&a),
            Err(Error::RankDeficient(1))
        ));
    }
}
