//! Numerical laboratory for DT(μ,c)-operators.
//!
//! The crate has two halves. The analytic half ([`measure`], [`bounds`],
//! [`hypothesis`]) represents atomic measures and decides which of the
//! non-spectrality criteria for DT-operators apply to them. The simulation
//! half ([`numkernel`], [`matmodel`], [`subspaces`]) samples finite
//! upper-triangular random-matrix models, builds the block similarity that
//! separates the atom at zero from an annulus, and measures angles between
//! the resulting invariant subspaces.
//!
//! Trial loops run through [`par`], which uses rayon when the `parallel`
//! feature is enabled and falls back to a plain loop otherwise.

pub mod bounds;
pub mod error;
pub mod hypothesis;
pub mod matmodel;
pub mod measure;
pub mod numkernel;
pub mod par;
pub mod subspaces;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Default seed used by every seeded entry point when none is supplied.
pub const DEFAULT_SEED: u64 = 20_240_601;
