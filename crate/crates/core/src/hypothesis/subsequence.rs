//! Extraction of a subsequence of atoms that converges to a point inside a
//! sector, with moduli decreasing fast enough that the balls of radius `d_n`
//! around the selected atoms miss every other selected atom.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::ComplexPoint;

/// Relative slack for the floating-point verification of strict inequalities.
const VERIFY_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    /// 1-based index in the measure.
    pub n: usize,
    pub location: ComplexPoint,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuncturedBall {
    pub center: ComplexPoint,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsequenceSelection {
    pub indices: Vec<usize>,
    /// Angle added to every argument after translating the limit to 0.
    pub rotation: f64,
    /// Which of the six fixed sectors `[kπ/3, (k+1)π/3)` was kept.
    pub sector: usize,
    /// Radii after shrinking, one per selected atom.
    pub d: Vec<f64>,
    pub set_a: Vec<ComplexPoint>,
    pub set_b: Vec<PuncturedBall>,
}

fn arg_0_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

fn sector_of(theta: f64) -> usize {
    ((theta / (PI / 3.0)).floor() as usize).min(5)
}

/// Builds the subsequence from atoms in index order.
///
/// Steps: translate by `limit`; check the atoms accumulate there; keep the
/// most populated of the six fixed sectors and rotate its smallest argument
/// to 0; keep a strictly decreasing-modulus chain; shrink each `d` to the
/// distance to the next chain element; then pick greedily so that
/// `|b_next| < |b_cur| − d_cur` and `d_next < d_cur`. The output is checked
/// pairwise before it is returned.
pub fn select_nza_subsequence(
    atoms: &[Candidate],
    limit: ComplexPoint,
) -> Result<SubsequenceSelection> {
    let shifted: Vec<(usize, Complex64, f64)> = atoms
        .iter()
        .map(|c| (c.n, c.location.0 - limit.0, c.d))
        .filter(|(_, b, _)| b.norm() > 0.0)
        .collect();
    if shifted.len() < 4 {
        return Err(Error::Selection(format!(
            "need at least four atoms away from the limit, got {}",
            shifted.len()
        )));
    }
    if let Some(c) = shifted.iter().find(|c| !(c.2 > 0.0 && c.2.is_finite())) {
        return Err(Error::Selection(format!(
            "d_{} = {} is not positive",
            c.0, c.2
        )));
    }
    let sup_all = shifted.iter().map(|c| c.1.norm()).fold(0.0, f64::max);
    let q = shifted.len() - shifted.len() / 4;
    let sup_tail = shifted[q..].iter().map(|c| c.1.norm()).fold(0.0, f64::max);
    if sup_tail > 0.25 * sup_all {
        return Err(Error::Selection(format!(
            "atoms do not accumulate at {}: last quarter reaches {sup_tail:.3e} of {sup_all:.3e}",
            limit.0
        )));
    }

    let mut counts = [0usize; 6];
    for c in &shifted {
        counts[sector_of(arg_0_2pi(c.1))] += 1;
    }
    let sector = (0..6)
        .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
        .expect("six sectors");
    if counts[sector] == 0 {
        return Err(Error::Selection(
            "no sector contains infinitely many atoms within range".into(),
        ));
    }
    let in_sector: Vec<&(usize, Complex64, f64)> = shifted
        .iter()
        .filter(|c| sector_of(arg_0_2pi(c.1)) == sector)
        .collect();
    let theta_min = in_sector
        .iter()
        .map(|c| arg_0_2pi(c.1))
        .fold(f64::INFINITY, f64::min);
    let rotation = -theta_min;
    let rot = Complex64::from_polar(1.0, rotation);

    let mut chain: Vec<(usize, Complex64, f64)> = Vec::new();
    for c in in_sector {
        let b = c.1 * rot;
        if chain.last().is_none_or(|last| b.norm() < last.1.norm()) {
            chain.push((c.0, b, c.2));
        }
    }
    if chain.len() < 3 {
        return Err(Error::Selection(format!(
            "decreasing-modulus chain in sector {sector} has only {} atoms",
            chain.len()
        )));
    }
    for w in chain.windows(2) {
        let (x, y) = (w[0].1, w[1].1);
        let lhs = (x - y).norm_sqr();
        let mid = x.norm_sqr() + y.norm() * (y.norm() - x.norm());
        if lhs > mid * (1.0 + VERIFY_REL) || mid >= x.norm_sqr() {
            return Err(Error::Selection(format!(
                "law-of-cosines bound fails between atoms {} and {}",
                w[0].0, w[1].0
            )));
        }
    }
    // Shrink d to the distance to the next chain element; the last element
    // has no successor and is dropped.
    let shrunk: Vec<(usize, Complex64, f64)> = chain
        .windows(2)
        .map(|w| (w[0].0, w[0].1, w[0].2.min((w[0].1 - w[1].1).norm())))
        .collect();

    let mut picked = vec![shrunk[0]];
    for c in &shrunk[1..] {
        let cur = picked.last().expect("nonempty");
        // Strict inequalities with a margin, so that exact ties such as
        // 1/6 = 1/5 − 1/30 are not decided by rounding.
        let room = cur.1.norm() - cur.2;
        if c.1.norm() < room - VERIFY_REL * cur.1.norm() && c.2 < cur.2 * (1.0 - VERIFY_REL) {
            picked.push(*c);
        }
    }
    if picked.len() < 2 {
        return Err(Error::Selection(
            "fewer than two atoms survive the gap step".into(),
        ));
    }

    verify_pairwise(&picked)?;

    let back = rot.conj();
    let set_a: Vec<ComplexPoint> = picked
        .iter()
        .map(|c| ComplexPoint(c.1 * back + limit.0))
        .collect();
    let set_b = picked
        .iter()
        .zip(&set_a)
        .map(|(c, a)| PuncturedBall {
            center: *a,
            radius: c.2,
        })
        .collect();
    let sel = SubsequenceSelection {
        indices: picked.iter().map(|c| c.0).collect(),
        rotation,
        sector,
        d: picked.iter().map(|c| c.2).collect(),
        set_a,
        set_b,
    };
    if let Some((i, k)) = first_intersection(&sel) {
        return Err(Error::Selection(format!(
            "atom {} lies in the ball around atom {}",
            sel.indices[k], sel.indices[i]
        )));
    }
    Ok(sel)
}

/// `|b_n − b_{n+k}| ≥ |b_n| − |b_{n+k}| > d_n > d_{n+k}` for all selected
/// pairs, in rotated coordinates.
fn verify_pairwise(picked: &[(usize, Complex64, f64)]) -> Result<()> {
    for (i, x) in picked.iter().enumerate() {
        for y in &picked[i + 1..] {
            let dist = (x.1 - y.1).norm();
            let gap = x.1.norm() - y.1.norm();
            let ok = dist >= gap * (1.0 - VERIFY_REL) && gap > x.2 && x.2 > y.2;
            if !ok {
                return Err(Error::Selection(format!(
                    "separation fails between atoms {} and {}",
                    x.0, y.0
                )));
            }
        }
    }
    Ok(())
}

/// First pair `(ball i, atom k)` with atom `k` inside the open punctured ball
/// around atom `i`; `None` means `A ∩ B = ∅` over the selection.
pub fn first_intersection(sel: &SubsequenceSelection) -> Option<(usize, usize)> {
    for (i, ball) in sel.set_b.iter().enumerate() {
        for (k, a) in sel.set_a.iter().enumerate() {
            let r = a.dist(ball.center);
            if k != i && r > 0.0 && r < ball.radius {
                return Some((i, k));
            }
        }
    }
    None
}
