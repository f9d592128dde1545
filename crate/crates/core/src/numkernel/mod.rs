//! Dense complex linear algebra used by the random-matrix laboratory.
//!
//! Everything here is self-contained double precision: matrices, triangular
//! solves, complex Schur with reordering, Jacobi singular values, QR
//! orthonormalization and a Bartels–Stewart Sylvester solver.

mod matrix;
mod schur;
mod svd;
mod sylvester;
mod triangular;

pub use matrix::ComplexMatrix;
pub use schur::{reorder, schur, schur_ordered, SchurForm};
pub use svd::{frobenius_norm, operator_norm, qr_orthonormalize, svd_values};
pub use sylvester::{
    sylvester_relative_residual, sylvester_residual, sylvester_solve, SPECTRAL_GAP_TOL, TOL_SYL,
};
pub use triangular::{
    invert_upper_triangular, solve_upper_triangular, solve_upper_triangular_right, TOL_SING,
};

/// Eigenvalues this close to a region boundary are classified as inside.
pub const TOL_BOUND: f64 = 1e-9;
