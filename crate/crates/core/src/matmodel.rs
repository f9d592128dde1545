//! Finite upper-triangular random-matrix models of DT(μ, c) and the block
//! decomposition `Z = [[Z1, corner], [0, Z2]]` with its intertwiner `Y` and
//! similarity `S = I + Y`.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::numkernel::{solve_upper_triangular, solve_upper_triangular_right, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPolicy {
    /// Diagonal entry `i` is the measure quantile at `(i + ½)/N`, so every
    /// atom gets its mass share of the diagonal and equal values are adjacent.
    #[default]
    Quantile,
    Iid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `Z = [[Z1, C], [0, Z2]]` with the nilpotent block first.
    #[default]
    ZeroFirst,
    /// `Z = [[Z2, C], [0, Z1]]`.
    AnnulusFirst,
}

impl Orientation {
    pub const BOTH: [Orientation; 2] = [Orientation::ZeroFirst, Orientation::AnnulusFirst];

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::ZeroFirst => "zero_first",
            Orientation::AnnulusFirst => "annulus_first",
        }
    }

    fn stream_bit(self) -> u64 {
        match self {
            Orientation::ZeroFirst => 0,
            Orientation::AnnulusFirst => 1,
        }
    }
}

/// Generator for one trial: the seed selects the key, `(trial, orientation)`
/// selects an independent ChaCha stream.
pub fn trial_rng(seed: u64, trial: u64, orientation: Orientation) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 1) | orientation.stream_bit());
    rng
}

#[derive(Debug, Clone)]
pub struct DTModelParams {
    pub measure: AtomicMeasure,
    pub c: f64,
    pub n: usize,
    pub seed: u64,
    pub diagonal_policy: DiagonalPolicy,
}

impl DTModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("N = {} must be at least 2", self.n)));
        }
        check_c(self.c)
    }
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "c = {c} must be positive and finite"
        )))
    }
}

fn gaussian(rng: &mut impl Rng, sd: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

fn sample_diagonal(
    measure: &AtomicMeasure,
    n: usize,
    policy: DiagonalPolicy,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    let sampler = measure.sampler();
    (0..n)
        .map(|i| {
            let u0 = match policy {
                DiagonalPolicy::Quantile => (i as f64 + 0.5) / n as f64,
                DiagonalPolicy::Iid => rng.random::<f64>(),
            };
            let u1 = rng.random::<f64>();
            let u2 = rng.random::<f64>();
            sampler.sample([u0, u1, u2]).0
        })
        .collect()
}

/// Upper-triangular `n×n` matrix with the given diagonal and strictly upper
/// entries complex Gaussian with `E|g|² = var`, drawn row by row.
fn triangular_with_diag(diag: &[Complex64], var: f64, rng: &mut impl Rng) -> ComplexMatrix {
    let n = diag.len();
    let sd = (var / 2.0).sqrt();
    let mut z = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        z[(i, i)] = diag[i];
        for j in i + 1..n {
            z[(i, j)] = gaussian(rng, sd);
        }
    }
    z
}

/// One draw of the `N×N` model: diagonal from μ per the policy, strictly
/// upper entries with variance `c²/N`.
pub fn sample_dt_matrix(params: &DTModelParams, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    params.validate()?;
    let n = params.n;
    let diag = sample_diagonal(&params.measure, n, params.diagonal_policy, rng);
    Ok(triangular_with_diag(
        &diag,
        params.c * params.c / n as f64,
        rng,
    ))
}

#[derive(Debug, Clone)]
pub struct BlockModel {
    pub orientation: Orientation,
    pub t: f64,
    /// Size of the nilpotent block.
    pub m: usize,
    pub z: ComplexMatrix,
    /// Strictly upper triangular `m×m` block.
    pub z1: ComplexMatrix,
    /// Invertible block carrying the annulus eigenvalues.
    pub z2: ComplexMatrix,
    /// Top-right block of `z` in the chosen orientation.
    pub corner: ComplexMatrix,
}

impl BlockModel {
    pub fn n(&self) -> usize {
        self.z.rows()
    }

    pub fn top(&self) -> &ComplexMatrix {
        match self.orientation {
            Orientation::ZeroFirst => &self.z1,
            Orientation::AnnulusFirst => &self.z2,
        }
    }

    pub fn bottom(&self) -> &ComplexMatrix {
        match self.orientation {
            Orientation::ZeroFirst => &self.z2,
            Orientation::AnnulusFirst => &self.z1,
        }
    }

    /// Row index where the bottom block starts.
    pub fn split(&self) -> usize {
        self.top().rows()
    }

    pub fn block_diagonal(&self) -> ComplexMatrix {
        ComplexMatrix::block_diag(self.top(), self.bottom())
    }
}

/// Smallest and largest modulus over the support of a measure.
pub fn support_moduli(measure: &AtomicMeasure) -> (f64, f64) {
    let origin = crate::measure::ComplexPoint::real(0.0);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for a in measure.atoms() {
        let r = a.location.0.norm();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    for c in measure.continuous() {
        lo = lo.min(c.support_distance(origin));
        hi = hi.max(c.center.0.norm() + c.r_out);
    }
    if let Some(tr) = measure.truncation() {
        lo = lo.min(tr.hull.distance_to(origin));
        hi = hi.max(tr.hull.sup_distance(origin));
    }
    (lo, hi)
}

/// Samples the block model with `m = round(tN)` (ties to even). Both blocks
/// and the corner have entry variance `c²/N`; the draw order is `Z1`, the
/// diagonal of `Z2`, the upper part of `Z2`, then the corner.
pub fn sample_block_model(
    t: f64,
    annulus_measure: &AtomicMeasure,
    c: f64,
    n: usize,
    orientation: Orientation,
    policy: DiagonalPolicy,
    rng: &mut impl Rng,
) -> Result<BlockModel> {
    check_c(c)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::invalid(format!("t = {t} must lie in (0, 1)")));
    }
    let nf = n as f64;
    if t * nf < 1.0 || (1.0 - t) * nf < 1.0 {
        return Err(Error::DegenerateBlock(format!(
            "t·N = {} and (1−t)·N = {} must both be at least 1",
            t * nf,
            (1.0 - t) * nf
        )));
    }
    let m = (t * nf).round_ties_even() as usize;
    if m == 0 || m >= n {
        return Err(Error::DegenerateBlock(format!(
            "round(tN) = {m} leaves an empty block at N = {n}"
        )));
    }
    let (inner, _) = support_moduli(annulus_measure);
    if !(inner > 0.0) {
        return Err(Error::invalid(
            "annulus measure must be supported away from 0",
        ));
    }
    let var = c * c / nf;
    let z1 = triangular_with_diag(&vec![Complex64::new(0.0, 0.0); m], var, rng);
    let diag = sample_diagonal(annulus_measure, n - m, policy, rng);
    let z2 = triangular_with_diag(&diag, var, rng);
    let (rows, cols) = match orientation {
        Orientation::ZeroFirst => (m, n - m),
        Orientation::AnnulusFirst => (n - m, m),
    };
    let sd = (var / 2.0).sqrt();
    let corner = ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng, sd));
    let (top, bottom) = match orientation {
        Orientation::ZeroFirst => (&z1, &z2),
        Orientation::AnnulusFirst => (&z2, &z1),
    };
    let mut z = ComplexMatrix::block_diag(top, bottom);
    z.set_block(0, rows, &corner);
    Ok(BlockModel {
        orientation,
        t,
        m,
        z,
        z1,
        z2,
        corner,
    })
}

/// The block `Y` with `Y·bottom − top·Y = corner`, from the terminating series
/// `Σ Z1ᵏ·C·Z2^{−k−1}` (zero block first) or `−Σ Z2^{−k−1}·C·Z1ᵏ` (annulus
/// block first). Only the rows or columns that `Z1ᵏ` can reach are touched.
pub fn compute_y_series(block: &BlockModel) -> Result<ComplexMatrix> {
    let m = block.m;
    let c = &block.corner;
    match block.orientation {
        Orientation::ZeroFirst => {
            let (a, b) = (&block.z1, &block.z2);
            let cols = b.rows();
            // w holds the leading nonzero rows of Z1ᵏ·C·Z2^{−k−1}.
            let mut w = solve_upper_triangular_right(c, b)?;
            let mut y = w.clone();
            for k in 1..m {
                let active = m - k;
                let prod =
                    a.block(0, 0, active, active + 1)
                        .matmul(&w.block(0, 0, active + 1, cols))?;
                w = solve_upper_triangular_right(&prod, b)?;
                for i in 0..active {
                    let src = w.row(i).to_vec();
                    for (dst, v) in y.row_mut(i).iter_mut().zip(src) {
                        *dst += v;
                    }
                }
            }
            Ok(y)
        }
        Orientation::AnnulusFirst => {
            let (a, b) = (&block.z2, &block.z1);
            let rows = a.rows();
            let mut v = solve_upper_triangular(a, c)?;
            let mut y = v.scale(Complex64::new(-1.0, 0.0));
            // v holds the trailing nonzero columns (from column k−1 on).
            for k in 1..m {
                let width = m - k;
                let prod = v
                    .block(0, v.cols() - width - 1, rows, width + 1)
                    .matmul(&b.block(k - 1, k, width + 1, width))?;
                v = solve_upper_triangular(a, &prod)?;
                for i in 0..rows {
                    let src = v.row(i).to_vec();
                    for (dst, val) in y.row_mut(i)[k..].iter_mut().zip(src) {
                        *dst -= val;
                    }
                }
            }
            Ok(y)
        }
    }
}

/// Places `y` as the top-right block of an `n×n` zero matrix.
pub fn embed_top_right(y: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if y.rows() + y.cols() != n {
        return Err(Error::Dimension(format!(
            "{}x{} block does not split an {n}x{n} matrix",
            y.rows(),
            y.cols()
        )));
    }
    let mut out = ComplexMatrix::zeros(n, n);
    out.set_block(0, y.rows(), y);
    Ok(out)
}

/// `(I + Y, I − Y)` for an `N×N` matrix supported on rows `< split` and
/// columns `≥ split`.
pub fn build_similarity(
    y_embedded: &ComplexMatrix,
    split: usize,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = y_embedded.rows();
    if !y_embedded.is_square() || split == 0 || split >= n {
        return Err(Error::Dimension(format!(
            "split {split} of a {}x{} matrix",
            n,
            y_embedded.cols()
        )));
    }
    for i in 0..n {
        for j in 0..n {
            let outside = i >= split || j < split;
            if outside && y_embedded[(i, j)] != Complex64::new(0.0, 0.0) {
                return Err(Error::NotTopRightBlock { row: i, col: j });
            }
        }
    }
    let id = ComplexMatrix::identity(n);
    Ok((id.add(y_embedded)?, id.sub(y_embedded)?))
}

/// `‖S·diag(top, bottom)·S⁻¹ − Z‖_F / ‖Z‖_F`.
pub fn verify_conjugation(
    block: &BlockModel,
    s: &ComplexMatrix,
    s_inv: &ComplexMatrix,
) -> Result<f64> {
    let recon = s.matmul(&block.block_diagonal())?.matmul(s_inv)?;
    let scale = block.z.frobenius_norm();
    Ok(recon.sub(&block.z)?.frobenius_norm() / if scale > 0.0 { scale } else { 1.0 })
}

/// Normalized trace `τ = (1/N)·Tr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceValue {
    pub value: Complex64,
    pub normalization: &'static str,
}

pub fn tau(a: &ComplexMatrix) -> Result<TraceValue> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "trace of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let sum: Complex64 = a.diag().into_iter().sum();
    Ok(TraceValue {
        value: sum / a.rows() as f64,
        normalization: "(1/N)·trace",
    })
}

/// `τ(A*A) = ‖A‖_F² / rows`.
pub fn tau_frob(a: &ComplexMatrix) -> f64 {
    a.frobenius_norm().powi(2) / a.rows() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub orientation: Orientation,
    #[serde(rename = "N")]
    pub n: usize,
    pub t: f64,
    pub c: f64,
    pub s_prime: f64,
    pub s: f64,
    #[serde(rename = "sigma_max_Y")]
    pub sigma_max_y: f64,
    #[serde(rename = "tau_frob_Y")]
    pub tau_frob_y: f64,
    pub residual_conjugation: f64,
}

pub fn write_trial_records(records: &[TrialRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::RadialComponent;
    use crate::numkernel::{sylvester_relative_residual, sylvester_solve};

    fn annulus() -> AtomicMeasure {
        AtomicMeasure::new(
            vec![],
            vec![RadialComponent::annulus(0.0, 0.9, 1.0, 1.0).unwrap()],
        )
        .unwrap()
    }

    fn block(n: usize, t: f64, o: Orientation, trial: u64) -> BlockModel {
        let mut rng = trial_rng(5, trial, o);
        sample_block_model(t, &annulus(), 1.0, n, o, DiagonalPolicy::Quantile, &mut rng).unwrap()
    }

    #[test]
    fn dirac_at_zero_is_nilpotent() {
        let p = DTModelParams {
            measure: AtomicMeasure::dirac(0.0),
            c: 1.0,
            n: 6,
            seed: 1,
            diagonal_policy: DiagonalPolicy::Quantile,
        };
        let z = sample_dt_matrix(&p, &mut trial_rng(p.seed, 0, Orientation::ZeroFirst)).unwrap();
        assert!(z.is_strictly_upper_triangular());
        let mut pow = z.clone();
        for _ in 1..6 {
            pow = pow.matmul(&z).unwrap();
        }
        assert!(pow.is_zero());
    }

    #[test]
    fn quantile_diagonal_keeps_proportions() {
        let mu = AtomicMeasure::new(
            vec![
                crate::measure::Atom::new(0.0, 0.25),
                crate::measure::Atom::new(2.0, 0.75),
            ],
            vec![],
        )
        .unwrap();
        let p = DTModelParams {
            measure: mu,
            c: 1.0,
            n: 8,
            seed: 3,
            diagonal_policy: DiagonalPolicy::Quantile,
        };
        let z = sample_dt_matrix(&p, &mut trial_rng(3, 0, Orientation::ZeroFirst)).unwrap();
        let d: Vec<f64> = z.diag().iter().map(|v| v.re).collect();
        assert_eq!(d, vec![0.0, 0.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn block_shapes_and_degeneracy() {
        let b = block(4, 0.5, Orientation::ZeroFirst, 0);
        assert_eq!(
            (b.m, b.z1.rows(), b.corner.rows(), b.corner.cols()),
            (2, 2, 2, 2)
        );
        assert!(b.z1[(0, 1)].norm() > 0.0 && b.z1.is_strictly_upper_triangular());
        assert!(b
            .z2
            .diag()
            .iter()
            .all(|d| d.norm() >= 0.9 - 1e-15 && d.norm() <= 1.0 + 1e-15));
        let mut rng = trial_rng(0, 0, Orientation::ZeroFirst);
        let err = sample_block_model(
            0.1,
            &annulus(),
            1.0,
            5,
            Orientation::ZeroFirst,
            DiagonalPolicy::Quantile,
            &mut rng,
        );
        assert!(matches!(err, Err(Error::DegenerateBlock(_))));
        assert!(sample_block_model(
            0.5,
            &AtomicMeasure::dirac(0.0),
            1.0,
            8,
            Orientation::ZeroFirst,
            DiagonalPolicy::Quantile,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn ties_round_to_even() {
        // t·N = 2.5 rounds to 2.
        assert_eq!(block(5, 0.5, Orientation::ZeroFirst, 0).m, 2);
    }

    #[test]
    fn series_matches_sylvester_both_orientations() {
        for o in Orientation::BOTH {
            for (n, t) in [(9, 0.3), (16, 0.5), (24, 0.8)] {
                let b = block(n, t, o, 1);
                let y = compute_y_series(&b).unwrap();
                let res = sylvester_relative_residual(b.top(), b.bottom(), &b.corner, &y).unwrap();
                assert!(res < 1e-12, "{o:?} n={n}: {res:e}");
                let oracle = sylvester_solve(b.top(), b.bottom(), &b.corner).unwrap();
                let diff = y.sub(&oracle).unwrap().frobenius_norm() / oracle.frobenius_norm();
                assert!(diff < 1e-10, "{o:?} n={n}: {diff:e}");
            }
        }
    }

    #[test]
    fn single_term_when_m_is_one() {
        let b = block(4, 0.25, Orientation::ZeroFirst, 2);
        assert_eq!(b.m, 1);
        let y = compute_y_series(&b).unwrap();
        let direct = solve_upper_triangular_right(&b.corner, &b.z2).unwrap();
        assert_eq!(y, direct);
    }

    #[test]
    fn similarity_and_conjugation() {
        for o in Orientation::BOTH {
            let b = block(20, 0.4, o, 3);
            let y = compute_y_series(&b).unwrap();
            let ye = embed_top_right(&y, b.n()).unwrap();
            assert!(ye.matmul(&ye).unwrap().is_zero());
            let (s, si) = build_similarity(&ye, b.split()).unwrap();
            let id = s
                .matmul(&si)
                .unwrap()
                .sub(&ComplexMatrix::identity(20))
                .unwrap();
            assert!(id.max_abs() < 1e-13);
            assert!(verify_conjugation(&b, &s, &si).unwrap() < 1e-12);
        }
    }

    #[test]
    fn conjugation_residual_grows_with_perturbation() {
        let b = block(12, 0.5, Orientation::ZeroFirst, 4);
        let y = compute_y_series(&b).unwrap();
        let res = |eps: f64| {
            let mut yp = y.clone();
            yp[(0, 0)] += eps;
            let (s, si) = build_similarity(&embed_top_right(&yp, 12).unwrap(), 6).unwrap();
            verify_conjugation(&b, &s, &si).unwrap()
        };
        let (r1, r2) = (res(1e-6), res(2e-6));
        assert!(r1 > 1e-9 && (r2 / r1 - 2.0).abs() < 1e-3);
    }

    #[test]
    fn identity_blocks_reproduce_corner() {
        let c = ComplexMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64 + 1.0, j as f64));
        let b = BlockModel {
            orientation: Orientation::ZeroFirst,
            t: 0.4,
            m: 2,
            z: {
                let mut z = ComplexMatrix::block_diag(
                    &ComplexMatrix::zeros(2, 2),
                    &ComplexMatrix::identity(3),
                );
                z.set_block(0, 2, &c);
                z
            },
            z1: ComplexMatrix::zeros(2, 2),
            z2: ComplexMatrix::identity(3),
            corner: c.clone(),
        };
        assert_eq!(compute_y_series(&b).unwrap(), c);
    }

    #[test]
    fn similarity_rejects_misplaced_support() {
        let mut y = ComplexMatrix::zeros(4, 4);
        y[(3, 0)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            build_similarity(&y, 2),
            Err(Error::NotTopRightBlock { row: 3, col: 0 })
        ));
        let (s, si) = build_similarity(&ComplexMatrix::zeros(4, 4), 2).unwrap();
        assert_eq!(s, ComplexMatrix::identity(4));
        assert_eq!(si, ComplexMatrix::identity(4));
    }

    #[test]
    fn traces() {
        assert_eq!(
            tau(&ComplexMatrix::identity(7)).unwrap().value,
            Complex64::new(1.0, 0.0)
        );
        let ones = ComplexMatrix::from_fn(5, 5, |_, _| Complex64::new(1.0, 0.0));
        assert!((tau_frob(&ones) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = block(30, 0.5, Orientation::AnnulusFirst, 9);
        let b = block(30, 0.5, Orientation::AnnulusFirst, 9);
        assert_eq!(a.z, b.z);
        let c = block(30, 0.5, Orientation::AnnulusFirst, 10);
        assert_ne!(a.z, c.z);
    }
}
