//! Lower bounds on `d_n²/(m_n+t_n)` for `Σ 2^{-n} δ_{1/n}`, over every
//! admissible `d_n`, evaluated in log space.
//!
//! With `1/k ≤ 1/n + d_n < 1/(k−1)`:
//! * `k = n` gives `2^{n+1}/(3n²(n+1)²)`,
//! * `k < n` gives `(1/(2n²)) f_n(k)²` with `f_n(x) = ((n−x)/x)·2^{x/2}`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

/// `ln` of the per-case lower bound for `k ∈ 1..=n`.
pub fn example3_log_bound(n: usize, k: usize) -> f64 {
    let nf = n as f64;
    if k == n {
        (nf + 1.0) * LN_2 - 3f64.ln() - 2.0 * nf.ln() - 2.0 * (nf + 1.0).ln()
    } else {
        log_half_f_squared(nf, k as f64)
    }
}

/// `ln((1/(2n²)) f_n(x)²)` for real `x ∈ (0, n)`.
pub fn log_half_f_squared(n: f64, x: f64) -> f64 {
    -LN_2 - 2.0 * n.ln() + 2.0 * ((n - x) / x).ln() + x * LN_2
}

/// Critical points `(r_n, s_n)` of `f_n`, real once `n ≥ 8/ln 2`.
pub fn critical_points(n: usize) -> Option<(f64, f64)> {
    let nf = n as f64;
    let disc = nf * nf - 8.0 * nf / LN_2;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    // r_n = (n − √disc)/2 rewritten to avoid cancellation.
    let r = 4.0 * nf / (LN_2 * (nf + root));
    Some((r, nf - r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub x: f64,
    pub ln_value: f64,
    /// `exp(ln_value)`; infinite when that overflows.
    pub value: f64,
}

impl PointValue {
    fn at(n: f64, x: f64) -> Self {
        let ln_value = log_half_f_squared(n, x);
        PointValue {
            x,
            ln_value,
            value: ln_value.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example3Analysis {
    pub n: usize,
    pub k_star: usize,
    pub min_bound: f64,
    pub ln_min_bound: f64,
    pub r_n: Option<f64>,
    pub s_n: Option<f64>,
    pub at_one: PointValue,
    pub at_r: Option<PointValue>,
    pub at_s: Option<PointValue>,
    pub at_n_minus_one: PointValue,
}

/// Minimum over all `k ∈ 1..=n` by full scan, plus the critical-point and
/// endpoint values of `(1/(2n²)) f_n²`. Requires `n ≥ 2`.
pub fn example3_min_bound(n: usize) -> Example3Analysis {
    assert!(n >= 2, "example 3 analysis needs n >= 2");
    let (k_star, ln_min) = (1..=n)
        .map(|k| (k, example3_log_bound(n, k)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("n >= 2");
    summarize(n, k_star, ln_min)
}

/// Same minimum from the candidates `{1, ⌊r_n⌋, ⌈r_n⌉, n−1, n}` only.
pub fn example3_min_bound_fast(n: usize) -> Example3Analysis {
    assert!(n >= 2, "example 3 analysis needs n >= 2");
    let mut cands = vec![1, n - 1, n];
    match critical_points(n) {
        Some((r, _)) => {
            cands.push((r.floor() as usize).clamp(1, n));
            cands.push((r.ceil() as usize).clamp(1, n));
        }
        None => cands.extend(1..=n),
    }
    cands.sort_unstable();
    cands.dedup();
    let (k_star, ln_min) = cands
        .into_iter()
        .map(|k| (k, example3_log_bound(n, k)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    summarize(n, k_star, ln_min)
}

fn summarize(n: usize, k_star: usize, ln_min: f64) -> Example3Analysis {
    let nf = n as f64;
    let crit = critical_points(n);
    Example3Analysis {
        n,
        k_star,
        min_bound: ln_min.exp(),
        ln_min_bound: ln_min,
        r_n: crit.map(|c| c.0),
        s_n: crit.map(|c| c.1),
        at_one: PointValue::at(nf, 1.0),
        at_r: crit.map(|c| PointValue::at(nf, c.0)),
        at_s: crit.map(|c| PointValue::at(nf, c.1)),
        at_n_minus_one: PointValue::at(nf, nf - 1.0),
    }
}

/// `(ln 2)² e² / 8`, the limit of the `r_n` branch.
pub fn r_branch_limit() -> f64 {
    LN_2 * LN_2 * std::f64::consts::E.powi(2) / 8.0
}
