//! Complex Schur decomposition with eigenvalue reordering.
//!
//! `A = U·T·Uᴴ` is computed by Householder reduction to Hessenberg form
//! followed by implicit single-shift QR sweeps with Wilkinson shifts. The
//! selected eigenvalues are then moved to the leading diagonal positions by
//! adjacent swaps, each realized by one Givens rotation, so the leading
//! columns of `U` span the invariant subspace of the selected eigenvalues.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Iterations allowed per eigenvalue before giving up.
const MAX_ITER_PER_EIG: usize = 40;

#[derive(Debug, Clone)]
pub struct SchurForm {
    /// Unitary factor `U`.
    pub unitary: ComplexMatrix,
    /// Upper-triangular factor `T`.
    pub triangular: ComplexMatrix,
    /// `eigen_order[i]` is the diagonal position the eigenvalue now at `i`
    /// occupied before reordering.
    pub eigen_order: Vec<usize>,
    /// Number of leading eigenvalues that satisfied the selection predicate.
    pub selected: usize,
}

impl SchurForm {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.triangular.diag()
    }

    /// `‖U·T·Uᴴ − A‖_F`.
    pub fn reconstruction_error(&self, a: &ComplexMatrix) -> f64 {
        let ut = self
            .unitary
            .matmul(&self.triangular)
            .expect("square factors");
        let recon = ut.matmul(&self.unitary.adjoint()).expect("square factors");
        recon.sub(a).expect("same shape").frobenius_norm()
    }
}

/// Givens rotation `G = [c s; -s̄ c]` with `G·[f; g] = [r; 0]`.
#[derive(Debug, Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn new(f: Complex64, g: Complex64) -> (Self, Complex64) {
        if g == ZERO {
            return (Self { c: 1.0, s: ZERO }, f);
        }
        let fa = f.norm();
        let ga = g.norm();
        if fa == 0.0 {
            return (
                Self {
                    c: 0.0,
                    s: g.conj() / ga,
                },
                Complex64::new(ga, 0.0),
            );
        }
        let norm = fa.hypot(ga);
        let phase = f / fa;
        (
            Self {
                c: fa / norm,
                s: phase * g.conj() / norm,
            },
            phase * norm,
        )
    }

    /// Rows `p` and `q` of `m`, columns `cols`: `[x; y] ← G·[x; y]`.
    fn apply_left(&self, m: &mut ComplexMatrix, p: usize, q: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let x = m[(p, j)];
            let y = m[(q, j)];
            m[(p, j)] = self.c * x + self.s * y;
            m[(q, j)] = -self.s.conj() * x + self.c * y;
        }
    }

    /// Columns `p` and `q` of `m`, rows `rows`: `[x y] ← [x y]·Gᴴ`.
    fn apply_right(&self, m: &mut ComplexMatrix, p: usize, q: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let x = m[(i, p)];
            let y = m[(i, q)];
            m[(i, p)] = self.c * x + self.s.conj() * y;
            m[(i, q)] = -self.s * x + self.c * y;
        }
    }
}

/// Householder reduction to upper Hessenberg form, accumulating into `u`.
fn hessenberg(h: &mut ComplexMatrix, u: &mut ComplexMatrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let tail_norm_sq: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail_norm_sq == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let norm = (tail_norm_sq + x0.norm_sqr()).sqrt();
        let phase = if x0 == ZERO {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let len = n - k - 1;
        v[0] = x0 - alpha;
        for i in 1..len {
            v[i] = h[(k + 1 + i, k)];
        }
        let vnorm_sq: f64 = v[..len].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm_sq;

        // H ← (I − τvvᴴ)·H on rows k+1.., columns k..
        for j in k..n {
            let mut s = ZERO;
            for i in 0..len {
                s += v[i].conj() * h[(k + 1 + i, j)];
            }
            s *= tau;
            for i in 0..len {
                let val = h[(k + 1 + i, j)] - v[i] * s;
                h[(k + 1 + i, j)] = val;
            }
        }
        // H ← H·(I − τvvᴴ) on all rows, columns k+1..
        for mat in [&mut *h, &mut *u] {
            for i in 0..n {
                let row = mat.row_mut(i);
                let mut s = ZERO;
                for l in 0..len {
                    s += row[k + 1 + l] * v[l];
                }
                s *= tau;
                for l in 0..len {
                    row[k + 1 + l] -= s * v[l].conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Unordered complex Schur decomposition.
pub fn schur(a: &ComplexMatrix) -> Result<SchurForm> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "schur of {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = a.rows();
    let mut t = a.clone();
    let mut u = ComplexMatrix::identity(n);
    if n == 0 {
        return Ok(SchurForm {
            unitary: u,
            triangular: t,
            eigen_order: Vec::new(),
            selected: 0,
        });
    }
    hessenberg(&mut t, &mut u);

    let eps = f64::EPSILON;
    // Fallback deflation scale for zero diagonal pairs; the norm is invariant
    // under the unitary sweeps, so it is computed once.
    let fallback_scale = t.max_abs();
    let max_total = MAX_ITER_PER_EIG * n.max(1);
    let mut total_iter = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        // Locate the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = t[(lo, lo - 1)].norm();
            let scale = t[(lo, lo)].norm() + t[(lo - 1, lo - 1)].norm();
            let scale = if scale == 0.0 { fallback_scale } else { scale };
            if sub <= eps * scale {
                t[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total_iter += 1;
        since_deflation += 1;
        if total_iter > max_total {
            return Err(Error::NoConvergence {
                iterations: total_iter,
            });
        }

        let shift = if since_deflation.is_multiple_of(11) {
            // Exceptional shift to break cycles.
            t[(hi, hi)] + Complex64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                t[(hi - 1, hi - 1)],
                t[(hi - 1, hi)],
                t[(hi, hi - 1)],
                t[(hi, hi)],
            )
        };

        // Implicit single-shift QR sweep on the active block lo..=hi.
        let mut f = t[(lo, lo)] - shift;
        let mut g = t[(lo + 1, lo)];
        for k in lo..hi {
            let (rot, _) = Givens::new(f, g);
            let col_start = if k == lo { lo } else { k - 1 };
            rot.apply_left(&mut t, k, k + 1, col_start..n);
            let row_end = (k + 3).min(hi + 1);
            rot.apply_right(&mut t, k, k + 1, 0..row_end);
            rot.apply_right(&mut u, k, k + 1, 0..n);
            if k > lo {
                t[(k + 1, k - 1)] = ZERO;
            }
            if k + 1 < hi {
                f = t[(k + 1, k)];
                g = t[(k + 2, k)];
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = ZERO;
        }
    }
    Ok(SchurForm {
        unitary: u,
        triangular: t,
        eigen_order: (0..n).collect(),
        selected: 0,
    })
}

/// Swaps diagonal entries `k` and `k+1` of the triangular factor.
fn swap_adjacent(form: &mut SchurForm, k: usize) {
    let t = &mut form.triangular;
    let n = t.rows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let x = t[(k, k + 1)];
    // First column of Q is the eigenvector (x, b − a) of the 2x2 block for b.
    let (rot, _) = Givens::new(x, b - a);
    rot.apply_left(t, k, k + 1, k..n);
    rot.apply_right(t, k, k + 1, 0..k + 2);
    rot.apply_right(&mut form.unitary, k, k + 1, 0..n);
    t[(k + 1, k)] = ZERO;
    t[(k, k)] = b;
    t[(k + 1, k + 1)] = a;
    form.eigen_order.swap(k, k + 1);
}

/// Reorders an existing Schur form so that eigenvalues satisfying `inside`
/// come first, preserving relative order within each group.
pub fn reorder(mut form: SchurForm, inside: impl Fn(Complex64) -> bool) -> SchurForm {
    let n = form.triangular.rows();
    let mut next = 0usize;
    for k in 0..n {
        if inside(form.triangular[(k, k)]) {
            let mut pos = k;
            while pos > next {
                swap_adjacent(&mut form, pos - 1);
                pos -= 1;
            }
            next += 1;
        }
    }
    form.selected = next;
    form
}

/// Schur decomposition with eigenvalues satisfying `inside` ordered first.
pub fn schur_ordered(a: &ComplexMatrix, inside: impl Fn(Complex64) -> bool) -> Result<SchurForm> {
    Ok(reorder(schur(a)?, inside))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn unitarity_error(u: &ComplexMatrix) -> f64 {
        let g = u.adjoint_matmul(u).unwrap();
        g.sub(&ComplexMatrix::identity(u.rows())).unwrap().max_abs()
    }

    #[test]
    fn diagonal_matrix_selects_first_basis_vector() {
        let a = ComplexMatrix::diagonal(&[Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)]);
        let form = schur_ordered(&a, |z| z.norm() < 1.0).unwrap();
        assert_eq!(form.selected, 1);
        assert!((form.unitary[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(form.unitary[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn block_triangular_invariant_subspace() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 2.0]]);
        let form = schur_ordered(&a, |z| z.norm() < 1.0).unwrap();
        assert_eq!(form.selected, 1);
        assert!(form.unitary[(1, 0)].norm() < 1e-15);
        // Selecting the eigenvalue 2 requires a swap; its eigenvector is (1, 2)/√5.
        let form = schur_ordered(&a, |z| z.norm() > 1.0).unwrap();
        let v = form.unitary.column(0);
        let ratio = v[1] / v[0];
        assert!((ratio - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((form.triangular[(0, 0)] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        for (n, seed) in [(4, 1), (8, 2), (16, 3), (64, 4)] {
            let a = random_matrix(n, seed);
            let form = schur_ordered(&a, |z| z.re > 0.0).unwrap();
            let scale = a.frobenius_norm();
            assert!(
                form.reconstruction_error(&a) <= 1e-12 * scale * (n as f64).sqrt(),
                "n={n}"
            );
            assert!(unitarity_error(&form.unitary) < 1e-12, "n={n}");
            assert!(form.triangular.is_upper_triangular());
            let diag = form.eigenvalues();
            assert!(diag[..form.selected].iter().all(|z| z.re > 0.0));
            assert!(diag[form.selected..].iter().all(|z| z.re <= 0.0));
        }
    }

    #[test]
    fn triangular_input_is_left_exact() {
        let a = ComplexMatrix::from_fn(5, 5, |i, j| {
            if j >= i {
                Complex64::new((i + 2 * j) as f64, 0.0)
            } else {
                ZERO
            }
        });
        let form = schur(&a).unwrap();
        assert_eq!(form.triangular, a);
        assert_eq!(form.unitary, ComplexMatrix::identity(5));
    }

    #[test]
    fn eigen_order_tracks_permutation() {
        let a = ComplexMatrix::diagonal(&[
            Complex64::new(5.0, 0.0),
            Complex64::new(0.1, 0.0),
            Complex64::new(4.0, 0.0),
            Complex64::new(0.2, 0.0),
        ]);
        let form = schur_ordered(&a, |z| z.norm() < 1.0).unwrap();
        assert_eq!(form.eigen_order, vec![1, 3, 0, 2]);
        let d = form.eigenvalues();
        assert!((d[0].re - 0.1).abs() < 1e-15 && (d[1].re - 0.2).abs() < 1e-15);
    }
}
