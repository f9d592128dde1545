//! Generators for the three worked families of atomic measures.
//!
//! * example 1: `C_p Σ n^{-p} δ_{1/n}` with `C_p = 1/ζ(p)`,
//! * example 2: `Σ C n^{-2} δ_{aₙ}` with `aₙ = Σ_{k≤n} ln k / k²`, `C = 6/π²`,
//! * example 3: `Σ 2^{-n} δ_{1/n}`.

use serde::{Deserialize, Serialize};

use super::{Atom, AtomicMeasure, ComplexPoint, FamilyTag, Neumaier, TailHull, Truncation};
use crate::error::{Error, Result};

/// Beyond this many atoms the masses `2^{-n}` of example 3 leave the range
/// of normal doubles.
pub const EXAMPLE3_MAX_ATOMS: usize = 1000;

/// Number of explicitly summed terms in series tails before the
/// Euler–Maclaurin remainder takes over.
const SERIES_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Example1,
    Example2,
    Example3,
}

/// Sums `f(k)` for `k = from+1 ..= upto` from the small end, compensated.
fn reverse_sum(from: usize, upto: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut s = Neumaier::default();
    for k in (from + 1..=upto).rev() {
        s.add(f(k as f64));
    }
    s.value()
}

/// `Σ_{k>n} k^{-p}` for `p > 1`.
///
/// Terms up to `max(n, 10⁶)` are summed directly; the remainder uses
/// Euler–Maclaurin through the `f'` term, which for these cutoffs is far
/// inside the integral bracket `[∫_{K+1}^∞, ∫_K^∞]`.
pub fn zeta_tail(p: f64, n: usize) -> f64 {
    let k = n.max(SERIES_TERMS);
    let direct = reverse_sum(n, k, |x| x.powf(-p));
    let kf = k as f64;
    let rem = kf.powf(1.0 - p) / (p - 1.0) - 0.5 * kf.powf(-p) + p * kf.powf(-p - 1.0) / 12.0;
    direct + rem
}

/// `Σ_{k>n} ln k / k²`.
fn log_over_square_tail(n: usize) -> f64 {
    let k = n.max(SERIES_TERMS);
    let direct = reverse_sum(n, k, |x| x.ln() / (x * x));
    let kf = k as f64;
    let lk = kf.ln();
    // ∫_K^∞ ln x/x² = (ln K + 1)/K, f(K) = ln K/K², f'(K) = (1 − 2 ln K)/K³.
    let rem = (lk + 1.0) / kf - 0.5 * lk / (kf * kf) - (1.0 - 2.0 * lk) / (12.0 * kf * kf * kf);
    direct + rem
}

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max < 2 {
        return Err(Error::invalid(format!(
            "n_max = {n_max} must be at least 2"
        )));
    }
    Ok(())
}

fn reciprocal_hull(n_max: usize) -> TailHull {
    TailHull {
        from: ComplexPoint::real(0.0),
        to: ComplexPoint::real(1.0 / (n_max as f64 + 1.0)),
        from_open: true,
        to_open: false,
    }
}

/// Keeps listed mass plus tail at most 1 after rounding.
fn clamp_tail(listed: f64, tail: f64) -> f64 {
    tail.min((1.0 - listed).max(0.0)).max(0.0)
}

pub fn example1(p: f64, n_max: usize) -> Result<AtomicMeasure> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::invalid(format!(
            "example 1 needs p > 1 (got {p}); the mass diverges"
        )));
    }
    check_n_max(n_max)?;
    let zeta = zeta_tail(p, 0);
    let cp = 1.0 / zeta;
    let atoms: Vec<Atom> = (1..=n_max)
        .map(|n| Atom::new(1.0 / n as f64, cp * (n as f64).powf(-p)))
        .collect();
    let mut listed = Neumaier::default();
    atoms.iter().for_each(|a| listed.add(a.mass));
    let tail = clamp_tail(listed.value(), cp * zeta_tail(p, n_max));
    AtomicMeasure::assemble(
        atoms,
        Vec::new(),
        FamilyTag::Example1 { p },
        Some(Truncation {
            n_max,
            tail_mass: tail,
            hull: reciprocal_hull(n_max),
        }),
        vec![ComplexPoint::real(0.0)],
    )
}

/// `6/π²`.
pub(crate) const C_EXAMPLE2: f64 = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);

pub fn example2(n_max: usize) -> Result<AtomicMeasure> {
    check_n_max(n_max)?;
    let mut cum = Neumaier::default();
    let mut atoms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let x = n as f64;
        cum.add(x.ln() / (x * x));
        atoms.push(Atom::new(cum.value(), C_EXAMPLE2 / (x * x)));
    }
    let a_last = cum.value();
    let next = (n_max + 1) as f64;
    let a_next = a_last + next.ln() / (next * next);
    let limit = a_last + log_over_square_tail(n_max);
    let mut listed = Neumaier::default();
    atoms.iter().for_each(|a| listed.add(a.mass));
    let tail = clamp_tail(listed.value(), C_EXAMPLE2 * zeta_tail(2.0, n_max));
    AtomicMeasure::assemble(
        atoms,
        Vec::new(),
        FamilyTag::Example2,
        Some(Truncation {
            n_max,
            tail_mass: tail,
            hull: TailHull {
                from: ComplexPoint::real(a_next),
                to: ComplexPoint::real(limit),
                from_open: false,
                to_open: true,
            },
        }),
        vec![ComplexPoint::real(limit)],
    )
}

pub fn example3(n_max: usize) -> Result<AtomicMeasure> {
    check_n_max(n_max)?;
    if n_max > EXAMPLE3_MAX_ATOMS {
        return Err(Error::invalid(format!(
            "example 3 supports at most {EXAMPLE3_MAX_ATOMS} listed atoms (got {n_max})"
        )));
    }
    let atoms = (1..=n_max)
        .map(|n| Atom::new(1.0 / n as f64, 0.5f64.powi(n as i32)))
        .collect();
    AtomicMeasure::assemble(
        atoms,
        Vec::new(),
        FamilyTag::Example3,
        Some(Truncation {
            n_max,
            tail_mass: 0.5f64.powi(n_max as i32),
            hull: reciprocal_hull(n_max),
        }),
        vec![ComplexPoint::real(0.0)],
    )
}

pub fn make_family(name: FamilyName, n_max: usize, p: Option<f64>) -> Result<AtomicMeasure> {
    match name {
        FamilyName::Example1 => {
            let p = p.ok_or_else(|| Error::invalid("example 1 needs the exponent p"))?;
            example1(p, n_max)
        }
        FamilyName::Example2 => example2(n_max),
        FamilyName::Example3 => example3(n_max),
    }
}
