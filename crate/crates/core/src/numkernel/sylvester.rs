//! Bartels–Stewart solver for `Y·B − A·Y = C`.

use num_complex::Complex64;

use super::matrix::{axpy, ComplexMatrix};
use super::schur::schur;
use crate::error::{Error, Result};

/// Relative residual contract: `‖YB − AY − C‖ ≤ TOL_SYL·(‖A‖+‖B‖)·‖Y‖`.
pub const TOL_SYL: f64 = 1e-10;

/// Eigenvalue pairs closer than `SPECTRAL_GAP_TOL·(‖A‖+‖B‖)` are treated as
/// overlapping.
pub const SPECTRAL_GAP_TOL: f64 = 1e-12;

/// Solves `Y·B − A·Y = C` with `A` (m×m), `B` (n×n), `C` (m×n).
///
/// Both coefficients are reduced to complex Schur form, the transformed
/// equation `Ỹ·T_B − T_A·Ỹ = C̃` is solved column by column with
/// upper-triangular back substitution, and the result is transformed back.
pub fn sylvester_solve(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if !a.is_square() || !b.is_square() || c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(Error::Dimension(format!(
            "sylvester with A {}x{}, B {}x{}, C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    let m = a.rows();
    let n = b.rows();
    let sa = schur(a)?;
    let sb = schur(b)?;
    let ta = &sa.triangular;
    let tb = &sb.triangular;

    let scale = a.frobenius_norm() + b.frobenius_norm();
    let mut min_gap = f64::INFINITY;
    for i in 0..m {
        for j in 0..n {
            min_gap = min_gap.min((tb[(j, j)] - ta[(i, i)]).norm());
        }
    }
    if m > 0 && n > 0 && min_gap <= SPECTRAL_GAP_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SpectraOverlap { gap: min_gap });
    }

    // C̃ = Q_Aᴴ·C·Q_B
    let c_t = sa.unitary.adjoint_matmul(c)?.matmul(&sb.unitary)?;

    // Work on Ỹ transposed so each unknown column is a contiguous row.
    let mut y_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n {
        for i in 0..m {
            rhs[i] = c_t[(i, j)];
        }
        for (l, yl) in y_cols.iter().enumerate() {
            let coeff = tb[(l, j)];
            if coeff != Complex64::new(0.0, 0.0) {
                axpy(&mut rhs, -coeff, yl);
            }
        }
        // (b_jj·I − T_A)·y = rhs, upper triangular.
        let bjj = tb[(j, j)];
        let mut y = vec![Complex64::new(0.0, 0.0); m];
        for i in (0..m).rev() {
            let row = ta.row(i);
            let mut acc = rhs[i];
            for k in i + 1..m {
                acc += row[k] * y[k];
            }
            y[i] = acc / (bjj - row[i]);
        }
        y_cols.push(y);
    }
    let y_t = ComplexMatrix::from_fn(m, n, |i, j| y_cols[j][i]);
    // Y = Q_A·Ỹ·Q_Bᴴ
    let y = sa.unitary.matmul(&y_t)?.matmul(&sb.unitary.adjoint())?;
    Ok(y)
}

/// `‖Y·B − A·Y − C‖_F`.
pub fn sylvester_residual(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    y: &ComplexMatrix,
) -> Result<f64> {
    let yb = y.matmul(b)?;
    let ay = a.matmul(y)?;
    Ok(yb.sub(&ay)?.sub(c)?.frobenius_norm())
}

/// Residual normalized as in [`TOL_SYL`].
pub fn sylvester_relative_residual(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    y: &ComplexMatrix,
) -> Result<f64> {
    let r = sylvester_residual(a, b, c, y)?;
    let denom = (a.frobenius_norm() + b.frobenius_norm()) * y.frobenius_norm();
    Ok(if denom == 0.0 { r } else { r / denom })
}
