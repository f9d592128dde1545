//! Borel regions used by the criteria, and their geometry against the parts
//! of a measure (points, radial components and truncated tails).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ComplexPoint, RadialComponent, RadialProfile, TailHull};
use crate::error::{Error, Result};

/// Relative slack on closed outer boundaries for point membership.
pub const BOUNDARY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionSpec {
    Singleton {
        point: ComplexPoint,
    },
    /// `{z : 0 < |z − center| ≤ radius}`.
    PuncturedBall {
        center: ComplexPoint,
        radius: f64,
    },
    /// `{z : r_in ≤ |z − center| ≤ r_out}`; a closed disk when `r_in = 0`.
    ClosedAnnulus {
        center: ComplexPoint,
        r_in: f64,
        r_out: f64,
    },
    Complement {
        inner: Box<RegionSpec>,
    },
    Union {
        parts: Vec<RegionSpec>,
    },
}

/// How a tail hull sits relative to a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Inside,
    Outside,
    Unknown,
}

impl Relation {
    fn flip(self) -> Self {
        match self {
            Relation::Inside => Relation::Outside,
            Relation::Outside => Relation::Inside,
            Relation::Unknown => Relation::Unknown,
        }
    }
}

/// Fraction of a continuous component's mass inside a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fraction {
    Exact(f64),
    Bounds(f64, f64),
}

impl Fraction {
    pub fn lo(self) -> f64 {
        match self {
            Fraction::Exact(f) => f,
            Fraction::Bounds(lo, _) => lo,
        }
    }

    pub fn hi(self) -> f64 {
        match self {
            Fraction::Exact(f) => f,
            Fraction::Bounds(_, hi) => hi,
        }
    }
}

fn puncture_tol(center: ComplexPoint) -> f64 {
    1e-15 * (1.0 + center.0.norm())
}

impl RegionSpec {
    pub fn singleton(point: impl Into<ComplexPoint>) -> Self {
        RegionSpec::Singleton {
            point: point.into(),
        }
    }

    pub fn punctured_ball(center: impl Into<ComplexPoint>, radius: f64) -> Self {
        RegionSpec::PuncturedBall {
            center: center.into(),
            radius,
        }
    }

    pub fn closed_annulus(center: impl Into<ComplexPoint>, r_in: f64, r_out: f64) -> Self {
        RegionSpec::ClosedAnnulus {
            center: center.into(),
            r_in,
            r_out,
        }
    }

    pub fn complement(inner: RegionSpec) -> Self {
        RegionSpec::Complement {
            inner: Box::new(inner),
        }
    }

    pub fn union(parts: Vec<RegionSpec>) -> Self {
        RegionSpec::Union { parts }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegionSpec::Singleton { point } => point.validate(),
            RegionSpec::PuncturedBall { center, radius } => {
                center.validate()?;
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::invalid(format!("punctured ball radius {radius}")));
                }
                Ok(())
            }
            RegionSpec::ClosedAnnulus {
                center,
                r_in,
                r_out,
            } => {
                center.validate()?;
                if !(r_in.is_finite() && r_out.is_finite() && *r_in >= 0.0 && r_in <= r_out) {
                    return Err(Error::invalid(format!("annulus radii [{r_in}, {r_out}]")));
                }
                Ok(())
            }
            RegionSpec::Complement { inner } => inner.validate(),
            RegionSpec::Union { parts } => parts.iter().try_for_each(RegionSpec::validate),
        }
    }

    /// Point membership. `tol` widens closed boundaries outward (relative to
    /// the radius, absolute for singletons); the puncture of a punctured ball
    /// is never widened.
    pub fn contains(&self, z: ComplexPoint, tol: f64) -> bool {
        match self {
            RegionSpec::Singleton { point } => {
                (z.0 - point.0).norm() <= tol.max(puncture_tol(*point))
            }
            RegionSpec::PuncturedBall { center, radius } => {
                let d = (z.0 - center.0).norm();
                d > puncture_tol(*center) && d <= radius * (1.0 + tol) + tol * 1e-3
            }
            RegionSpec::ClosedAnnulus {
                center,
                r_in,
                r_out,
            } => {
                let d = (z.0 - center.0).norm();
                d >= r_in * (1.0 - tol) - tol * 1e-3 && d <= r_out * (1.0 + tol) + tol * 1e-3
            }
            RegionSpec::Complement { inner } => !inner.contains(z, tol),
            RegionSpec::Union { parts } => parts.iter().any(|p| p.contains(z, tol)),
        }
    }

    /// Distance from `z` to the nearest boundary point of the region.
    pub fn boundary_distance(&self, z: ComplexPoint) -> f64 {
        match self {
            RegionSpec::Singleton { point } => (z.0 - point.0).norm(),
            RegionSpec::PuncturedBall { center, radius } => {
                let d = (z.0 - center.0).norm();
                d.min((d - radius).abs())
            }
            RegionSpec::ClosedAnnulus {
                center,
                r_in,
                r_out,
            } => {
                let d = (z.0 - center.0).norm();
                // A zero inner radius is a closed disk with no inner boundary.
                let inner = if *r_in > 0.0 {
                    (d - r_in).abs()
                } else {
                    f64::INFINITY
                };
                inner.min((d - r_out).abs())
            }
            RegionSpec::Complement { inner } => inner.boundary_distance(z),
            RegionSpec::Union { parts } => parts
                .iter()
                .map(|p| p.boundary_distance(z))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Whether the tail hull segment lies inside, outside, or straddles the
    /// region. `is_listed` reports whether a point coincides with a listed
    /// atom, which no tail atom can occupy.
    pub fn tail_relation(
        &self,
        hull: &TailHull,
        is_listed: &dyn Fn(ComplexPoint) -> bool,
    ) -> Relation {
        let tol = BOUNDARY_REL_TOL;
        match self {
            RegionSpec::Singleton { point } => {
                if hull.distance_to(*point) > puncture_tol(*point) || hull.is_open_endpoint(*point)
                {
                    Relation::Outside
                } else {
                    Relation::Unknown
                }
            }
            RegionSpec::PuncturedBall { center, radius } => {
                let (dmin, dmax) = hull.distance_range(*center);
                if dmin > radius * (1.0 + tol) {
                    Relation::Outside
                } else if dmax <= radius * (1.0 + tol) {
                    let center_on_hull = hull.distance_to(*center) <= puncture_tol(*center);
                    if center_on_hull && !hull.is_open_endpoint(*center) && !is_listed(*center) {
                        Relation::Unknown
                    } else {
                        Relation::Inside
                    }
                } else {
                    Relation::Unknown
                }
            }
            RegionSpec::ClosedAnnulus {
                center,
                r_in,
                r_out,
            } => {
                let (dmin, dmax) = hull.distance_range(*center);
                if dmin > r_out * (1.0 + tol) || dmax < r_in * (1.0 - tol) {
                    Relation::Outside
                } else if dmax <= r_out * (1.0 + tol) && dmin >= r_in * (1.0 - tol) {
                    Relation::Inside
                } else {
                    Relation::Unknown
                }
            }
            RegionSpec::Complement { inner } => inner.tail_relation(hull, is_listed).flip(),
            RegionSpec::Union { parts } => {
                let rels: Vec<Relation> = parts
                    .iter()
                    .map(|p| p.tail_relation(hull, is_listed))
                    .collect();
                if rels.contains(&Relation::Inside) {
                    Relation::Inside
                } else if rels.iter().all(|r| *r == Relation::Outside) {
                    Relation::Outside
                } else {
                    Relation::Unknown
                }
            }
        }
    }

    /// Fraction of a radial component's mass that lies in the region.
    pub fn component_fraction(&self, comp: &RadialComponent) -> Fraction {
        match self {
            RegionSpec::Singleton { .. } => Fraction::Exact(0.0),
            RegionSpec::PuncturedBall { center, radius } => {
                Fraction::Exact(closed_disk_fraction(comp, *center, *radius))
            }
            RegionSpec::ClosedAnnulus {
                center,
                r_in,
                r_out,
            } => {
                if comp.profile == RadialProfile::UniformCircle
                    && (comp.center.0 - center.0).norm() <= puncture_tol(*center)
                {
                    let rho = comp.r_out;
                    let inside = rho >= r_in * (1.0 - BOUNDARY_REL_TOL)
                        && rho <= r_out * (1.0 + BOUNDARY_REL_TOL);
                    return Fraction::Exact(if inside { 1.0 } else { 0.0 });
                }
                let outer = closed_disk_fraction(comp, *center, *r_out);
                let inner = if *r_in > 0.0 {
                    closed_disk_fraction(comp, *center, *r_in)
                } else {
                    0.0
                };
                Fraction::Exact((outer - inner).clamp(0.0, 1.0))
            }
            RegionSpec::Complement { inner } => match inner.component_fraction(comp) {
                Fraction::Exact(f) => Fraction::Exact(1.0 - f),
                Fraction::Bounds(lo, hi) => Fraction::Bounds(1.0 - hi, 1.0 - lo),
            },
            RegionSpec::Union { parts } => {
                let fr: Vec<Fraction> = parts.iter().map(|p| p.component_fraction(comp)).collect();
                if fr.contains(&Fraction::Exact(1.0)) {
                    return Fraction::Exact(1.0);
                }
                let nonzero: Vec<&Fraction> = fr.iter().filter(|f| f.hi() > 0.0).collect();
                match nonzero.as_slice() {
                    [] => Fraction::Exact(0.0),
                    [only] => **only,
                    _ => {
                        let lo = fr.iter().map(|f| f.lo()).fold(0.0, f64::max);
                        let hi = fr.iter().map(|f| f.hi()).sum::<f64>().min(1.0);
                        Fraction::Bounds(lo, hi)
                    }
                }
            }
        }
    }
}

/// Area of the intersection of two disks with radii `r1`, `r2` whose centers
/// are `d` apart.
pub(crate) fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if r1 <= 0.0 || r2 <= 0.0 || d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1))
        .clamp(-1.0, 1.0)
        .acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2))
        .clamp(-1.0, 1.0)
        .acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.sqrt()
}

/// Fraction of a circle of radius `rho` (center offset `d` from the disk
/// center) that lies in a closed disk of radius `big_r`.
pub(crate) fn arc_fraction(rho: f64, big_r: f64, d: f64) -> f64 {
    if rho == 0.0 || d == 0.0 {
        return if d + rho <= big_r * (1.0 + BOUNDARY_REL_TOL) {
            1.0
        } else {
            0.0
        };
    }
    if d + rho <= big_r {
        return 1.0;
    }
    if d >= rho + big_r || d + big_r <= rho {
        return 0.0;
    }
    let x = ((big_r * big_r - rho * rho - d * d) / (2.0 * rho * d)).clamp(-1.0, 1.0);
    1.0 - x.acos() / PI
}

fn closed_disk_fraction(comp: &RadialComponent, center: ComplexPoint, radius: f64) -> f64 {
    let d = (comp.center.0 - center.0).norm();
    match comp.profile {
        RadialProfile::UniformCircle => arc_fraction(comp.r_out, radius, d),
        RadialProfile::UniformAnnulus if d <= puncture_tol(center) => {
            let (a, b) = (comp.r_in * comp.r_in, comp.r_out * comp.r_out);
            if radius >= comp.r_out {
                1.0
            } else if radius <= comp.r_in {
                0.0
            } else {
                ((radius * radius - a) / (b - a)).clamp(0.0, 1.0)
            }
        }
        RadialProfile::UniformAnnulus => {
            let area = PI * (comp.r_out * comp.r_out - comp.r_in * comp.r_in);
            let outer = lens_area(comp.r_out, radius, d);
            let inner = lens_area(comp.r_in, radius, d);
            ((outer - inner) / area).clamp(0.0, 1.0)
        }
    }
}
