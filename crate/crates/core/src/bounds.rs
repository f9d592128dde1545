//! Closed-form lower bounds on the cosine of the angle between the ranges of
//! complementary invariant projections.
//!
//! Every bound has the shape `(1 + r²)^{-1/2}` for some ratio `r ≥ 0`; the
//! ratio is formed first so that huge arguments never square into overflow.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::EPS_MASS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Lemma1Sharp,
    Lemma1Weak,
    UnzaChain,
    NzaChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleBound {
    pub cos_lower: f64,
    /// `arccos(cos_lower)` in radians.
    pub angle_upper: f64,
    pub provenance: Provenance,
}

/// Above this the direct form `1 + r²` is replaced by the asymptotic one.
const SWITCH_R2: f64 = 1e12;

fn from_ratio(r: f64, provenance: Provenance) -> AngleBound {
    let cos = if r * r > SWITCH_R2 {
        let inv = 1.0 / r;
        inv / (1.0 + inv * inv).sqrt()
    } else {
        1.0 / (1.0 + r * r).sqrt()
    };
    AngleBound {
        cos_lower: cos,
        angle_upper: cos.acos(),
        provenance,
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} = {v} must be positive and finite"
        )))
    }
}

/// `(1 + s²/(c²·max(t, 1−t)))^{-1/2}`.
pub fn lemma1_cos_lower(s: f64, c: f64, t: f64) -> Result<AngleBound> {
    positive("s", s)?;
    positive("c", c)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::invalid(format!("t = {t} must lie in (0, 1)")));
    }
    let r = s / (c * t.max(1.0 - t).sqrt());
    Ok(from_ratio(r, Provenance::Lemma1Sharp))
}

/// `(1 + 2s²/c²)^{-1/2}`.
pub fn lemma1_cos_weak(s: f64, c: f64) -> Result<AngleBound> {
    positive("s", s)?;
    positive("c", c)?;
    Ok(from_ratio(
        std::f64::consts::SQRT_2 * (s / c),
        Provenance::Lemma1Weak,
    ))
}

/// `(1 + 4d²/(c²(m+t)))^{-1/2}`. `m = 0` is accepted so that a lower end of
/// an unresolved mass interval still yields a valid bound.
pub fn unza_chain_cos(d: f64, c: f64, m: f64, t: f64) -> Result<AngleBound> {
    positive("d", d)?;
    positive("c", c)?;
    if !(m.is_finite() && m >= 0.0) {
        return Err(Error::invalid(format!(
            "m = {m} must be nonnegative and finite"
        )));
    }
    positive("t", t)?;
    if m + t > 1.0 + EPS_MASS {
        return Err(Error::invalid(format!("m + t = {} exceeds 1", m + t)));
    }
    Ok(from_ratio(
        2.0 * d / (c * (m + t).sqrt()),
        Provenance::UnzaChain,
    ))
}

/// `(1 + 2d²/(c²t))^{-1/2}`.
pub fn nza_chain_cos(d: f64, c: f64, t: f64) -> Result<AngleBound> {
    positive("d", d)?;
    positive("c", c)?;
    positive("t", t)?;
    if t > 1.0 + EPS_MASS {
        return Err(Error::invalid(format!("t = {t} exceeds 1")));
    }
    Ok(from_ratio(
        std::f64::consts::SQRT_2 * d / (c * t.sqrt()),
        Provenance::NzaChain,
    ))
}

/// Exact value of the sharp bound for rational inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCos {
    /// `cos²`, always exact.
    pub squared: BigRational,
    /// `cos` itself when `cos²` is the square of a rational.
    pub root: Option<BigRational>,
}

impl ExactCos {
    pub fn to_f64(&self) -> f64 {
        match &self.root {
            Some(r) => ratio_to_f64(r),
            None => ratio_to_f64(&self.squared).sqrt(),
        }
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    // Scale so the quotient keeps 64 bits of precision before rounding.
    let shift = 64i64 + r.denom().bits() as i64 - r.numer().abs().bits() as i64;
    let (num, den) = if shift >= 0 {
        (r.numer() << shift as usize, r.denom().clone())
    } else {
        (r.numer().clone(), r.denom() << (-shift) as usize)
    };
    let q = num / den;
    let q: f64 = q.to_string().parse().unwrap_or(f64::NAN);
    q * 2f64.powi(-(shift as i32))
}

fn exact_sqrt(x: &BigInt) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.sqrt();
    (&r * &r == *x).then_some(r)
}

/// Sharp bound in exact rational arithmetic.
pub fn lemma1_cos_lower_exact(
    s: &BigRational,
    c: &BigRational,
    t: &BigRational,
) -> Result<ExactCos> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    if *s <= zero || *c <= zero {
        return Err(Error::invalid("s and c must be positive"));
    }
    if *t <= zero || *t >= one {
        return Err(Error::invalid("t must lie in (0, 1)"));
    }
    let other = &one - t;
    let big = if *t >= other { t.clone() } else { other };
    let x = (s * s) / (c * c * big);
    let squared = one / (BigRational::one() + x);
    let root = match (exact_sqrt(squared.numer()), exact_sqrt(squared.denom())) {
        (Some(n), Some(d)) => Some(BigRational::new(n, d)),
        _ => None,
    };
    Ok(ExactCos { squared, root })
}

/// Parses a decimal (`"0.9"`, `"-1.25e-3"`) or fraction (`"9/10"`) exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::invalid(format!("not a decimal number: {text:?}"));
    if text.contains('/') {
        return BigRational::from_str(text).map_err(|_| bad());
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int
            .chars()
            .chain(frac.chars())
            .all(|ch| ch.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_sevenths_exact_and_float() {
        let q = |s: &str| parse_rational(s).unwrap();
        let e = lemma1_cos_lower_exact(&q("2"), &q("1"), &q("0.9")).unwrap();
        assert_eq!(e.root, Some(BigRational::new(3.into(), 7.into())));
        assert_eq!(e.squared, BigRational::new(9.into(), 49.into()));
        let f = lemma1_cos_lower(2.0, 1.0, 0.9).unwrap();
        assert!((f.cos_lower - 3.0 / 7.0).abs() < 1e-15);
        assert!((e.to_f64() - 3.0 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn irrational_root_reported_as_square_only() {
        let q = |s: &str| parse_rational(s).unwrap();
        let e = lemma1_cos_lower_exact(&q("1"), &q("1"), &q("1/2")).unwrap();
        assert_eq!(e.root, None);
        assert_eq!(e.squared, BigRational::new(1.into(), 3.into()));
        assert!((e.to_f64() - 3f64.sqrt().recip()).abs() < 1e-15);
    }

    #[test]
    fn listed_values() {
        assert!((lemma1_cos_weak(2.0, 1.0).unwrap().cos_lower - 1.0 / 3.0).abs() < 1e-16);
        let u = unza_chain_cos(0.1, 1.0, 0.05, 0.05).unwrap().cos_lower;
        assert!((u - 1.4f64.powf(-0.5)).abs() < 1e-15);
        assert!((u - 0.845_154).abs() < 1e-6);
        let n = nza_chain_cos(1.0, 1.0, 1.0).unwrap().cos_lower;
        assert!((n - 3f64.sqrt().recip()).abs() < 1e-15);
        let sharp = lemma1_cos_lower(1.0, 1.0, 0.5).unwrap().cos_lower;
        let weak = lemma1_cos_weak(1.0, 1.0).unwrap().cos_lower;
        assert!((sharp - weak).abs() <= 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(lemma1_cos_lower(1.0, 1.0, 0.0).is_err());
        assert!(lemma1_cos_lower(1.0, 1.0, 1.0).is_err());
        assert!(lemma1_cos_lower(-1.0, 1.0, 0.5).is_err());
        assert!(unza_chain_cos(1.0, 1.0, 0.6, 0.5).is_err());
        assert!(nza_chain_cos(1.0, 0.0, 0.5).is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(
            parse_rational("0.9").unwrap(),
            BigRational::new(9.into(), 10.into())
        );
        assert_eq!(
            parse_rational("-1.25e-3").unwrap(),
            BigRational::new((-1).into(), 800.into())
        );
        assert_eq!(
            parse_rational("2e2").unwrap(),
            BigRational::from_integer(200.into())
        );
    }

    #[test]
    fn ratio_conversion_is_correctly_rounded() {
        let r = BigRational::new(1.into(), 3.into());
        assert_eq!(ratio_to_f64(&r), 1.0 / 3.0);
        let big = BigRational::new(BigInt::from(10).pow(40), 7.into());
        assert!((ratio_to_f64(&big) / (1e40 / 7.0) - 1.0).abs() < 1e-15);
    }
}
