use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row slices; handy in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Copy of the block starting at `(r0, c0)` with the given shape.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "block out of range"
        );
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            out.row_mut(i)
                .copy_from_slice(&self.row(r0 + i)[c0..c0 + cols]);
        }
        out
    }

    /// Leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        self.block(0, 0, self.rows, k)
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, src: &ComplexMatrix) {
        assert!(
            r0 + src.rows <= self.rows && c0 + src.cols <= self.cols,
            "block out of range"
        );
        for i in 0..src.rows {
            let dst = &mut self.row_mut(r0 + i)[c0..c0 + src.cols];
            dst.copy_from_slice(src.row(i));
        }
    }

    /// `[top; bottom]`.
    pub fn vstack(top: &ComplexMatrix, bottom: &ComplexMatrix) -> Result<Self> {
        if top.cols != bottom.cols {
            return Err(Error::Dimension(format!(
                "vstack of {} and {} columns",
                top.cols, bottom.cols
            )));
        }
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        Ok(Self {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            data,
        })
    }

    /// `[left, right]`.
    pub fn hstack(left: &ComplexMatrix, right: &ComplexMatrix) -> Result<Self> {
        if left.rows != right.rows {
            return Err(Error::Dimension(format!(
                "hstack of {} and {} rows",
                left.rows, right.rows
            )));
        }
        let mut out = Self::zeros(left.rows, left.cols + right.cols);
        out.set_block(0, 0, left);
        out.set_block(0, left.cols, right);
        Ok(out)
    }

    /// Block-diagonal matrix `diag(a, b)`.
    pub fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        let mut out = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        out.set_block(0, 0, a);
        out.set_block(a.rows, a.cols, b);
        out
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in a_row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                axpy(out_row, a, rhs.row(k));
            }
        }
        Ok(out)
    }

    /// `self^H · rhs` without materializing the adjoint.
    pub fn adjoint_matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::Dimension(format!(
                "adjoint_matmul {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = rhs.row(k);
            for (i, a) in a_row.iter().enumerate() {
                let a = a.conj();
                if a == ZERO {
                    continue;
                }
                axpy(&mut out.data[i * rhs.cols..(i + 1) * rhs.cols], a, b_row);
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &ComplexMatrix,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "elementwise op on {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// True iff every entry strictly below the diagonal is exactly zero.
    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| self.row(i)[..i.min(self.cols)].iter().all(|&z| z == ZERO))
    }

    /// True iff every entry on or below the diagonal is exactly zero.
    pub fn is_strictly_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| {
            self.row(i)[..(i + 1).min(self.cols)]
                .iter()
                .all(|&z| z == ZERO)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&z| z == ZERO)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `y += a * x`.
#[inline]
pub(crate) fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `sum conj(x_i) * y_i`.
#[inline]
pub(crate) fn dotc(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}
