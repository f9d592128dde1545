use num_complex::Complex64;

use super::matrix::{axpy, ComplexMatrix};
use crate::error::{Error, Result};

/// Diagonal entries with modulus at or below `TOL_SING · max|T|` count as zero.
pub const TOL_SING: f64 = 1e-14;

fn check_diagonal(t: &ComplexMatrix) -> Result<()> {
    if !t.is_square() {
        return Err(Error::Dimension(format!(
            "triangular factor is {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    let scale = t.max_abs().max(f64::MIN_POSITIVE);
    for i in 0..t.rows() {
        let d = t[(i, i)].norm();
        if d <= TOL_SING * scale || !d.is_finite() {
            return Err(Error::Singular { index: i, value: d });
        }
    }
    Ok(())
}

/// Solves `T·X = B` for upper-triangular `T`. Entries of `T` below the
/// diagonal are ignored.
pub fn solve_upper_triangular(t: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_diagonal(t)?;
    let n = t.rows();
    if b.rows() != n {
        return Err(Error::Dimension(format!(
            "T is {n}x{n}, B has {} rows",
            b.rows()
        )));
    }
    let mut x = b.clone();
    for i in (0..n).rev() {
        let mut acc = x.row(i).to_vec();
        let t_row = t.row(i);
        for k in i + 1..n {
            let tik = t_row[k];
            if tik != Complex64::new(0.0, 0.0) {
                axpy(&mut acc, -tik, x.row(k));
            }
        }
        let inv = t_row[i].inv();
        for (dst, a) in x.row_mut(i).iter_mut().zip(acc) {
            *dst = a * inv;
        }
    }
    Ok(x)
}

/// Solves `X·T = B` for upper-triangular `T`.
pub fn solve_upper_triangular_right(b: &ComplexMatrix, t: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_diagonal(t)?;
    let n = t.rows();
    if b.cols() != n {
        return Err(Error::Dimension(format!(
            "T is {n}x{n}, B has {} columns",
            b.cols()
        )));
    }
    let mut x = ComplexMatrix::zeros(b.rows(), n);
    let inv_diag: Vec<Complex64> = (0..n).map(|j| t[(j, j)].inv()).collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for r in 0..b.rows() {
        acc.copy_from_slice(b.row(r));
        for j in 0..n {
            let xj = acc[j] * inv_diag[j];
            x[(r, j)] = xj;
            if j + 1 < n {
                axpy(&mut acc[j + 1..], -xj, &t.row(j)[j + 1..]);
            }
        }
    }
    Ok(x)
}

/// Inverse of an upper-triangular matrix via `T·X = I`.
pub fn invert_upper_triangular(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve_upper_triangular(t, &ComplexMatrix::identity(t.rows()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_upper(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            if j < i {
                Complex64::new(0.0, 0.0)
            } else if i == j {
                Complex64::new(2.0 + i as f64, 0.5)
            } else {
                Complex64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i + j) as f64 * 0.1)
            }
        })
    }

    #[test]
    fn left_and_right_solves_have_small_residual() {
        let t = sample_upper(7);
        let b = ComplexMatrix::from_fn(7, 3, |i, j| Complex64::new(i as f64, j as f64 - 1.0));
        let x = solve_upper_triangular(&t, &b).unwrap();
        assert!(t.matmul(&x).unwrap().sub(&b).unwrap().max_abs() < 1e-12);

        let b2 = b.transpose();
        let y = solve_upper_triangular_right(&b2, &t).unwrap();
        assert!(y.matmul(&t).unwrap().sub(&b2).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn singular_diagonal_is_rejected() {
        let t = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 0.0]]);
        match solve_upper_triangular(&t, &ComplexMatrix::identity(2)) {
            Err(Error::Singular { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }
}
