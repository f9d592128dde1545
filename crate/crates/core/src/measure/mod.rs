//! Compactly supported probability measures on ℂ: finitely many listed atoms,
//! uniform radial components, and an optional truncated tail of atoms whose
//! total mass and convex hull are known but whose individual atoms are not
//! listed.
//!
//! Any query whose answer depends on how the unlisted tail meets a region
//! returns an interval ([`Mass`]) instead of a point value.

mod family;
mod region;
mod spec;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use family::{
    example1, example2, example3, make_family, zeta_tail, FamilyName, EXAMPLE3_MAX_ATOMS,
};
pub use region::{Fraction, RegionSpec, Relation, BOUNDARY_REL_TOL};
pub use spec::{parse_measure_spec, ComponentSpec, MeasureSpec};

/// Normalization tolerance on total mass.
pub const EPS_MASS: f64 = 1e-9;

/// A point of ℂ; serialized as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ComplexPoint(pub Complex64);

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Self {
        ComplexPoint(Complex64::new(re, im))
    }

    pub fn real(re: f64) -> Self {
        ComplexPoint::new(re, 0.0)
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn dist(self, other: ComplexPoint) -> f64 {
        (self.0 - other.0).norm()
    }

    pub fn validate(self) -> Result<()> {
        if self.0.re.is_finite() && self.0.im.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("non-finite point {}", self.0)))
        }
    }
}

impl From<[f64; 2]> for ComplexPoint {
    fn from(v: [f64; 2]) -> Self {
        ComplexPoint::new(v[0], v[1])
    }
}

impl From<ComplexPoint> for [f64; 2] {
    fn from(p: ComplexPoint) -> Self {
        [p.0.re, p.0.im]
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        ComplexPoint(z)
    }
}

impl From<f64> for ComplexPoint {
    fn from(x: f64) -> Self {
        ComplexPoint::real(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: ComplexPoint,
    pub mass: f64,
}

impl Atom {
    pub fn new(location: impl Into<ComplexPoint>, mass: f64) -> Self {
        Atom {
            location: location.into(),
            mass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialProfile {
    UniformAnnulus,
    /// Arc-length measure on the circle of radius `r_out` (`r_in == r_out`).
    UniformCircle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialComponent {
    pub center: ComplexPoint,
    pub r_in: f64,
    pub r_out: f64,
    pub mass: f64,
    pub profile: RadialProfile,
}

impl RadialComponent {
    pub fn annulus(
        center: impl Into<ComplexPoint>,
        r_in: f64,
        r_out: f64,
        mass: f64,
    ) -> Result<Self> {
        let c = RadialComponent {
            center: center.into(),
            r_in,
            r_out,
            mass,
            profile: RadialProfile::UniformAnnulus,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn circle(center: impl Into<ComplexPoint>, radius: f64, mass: f64) -> Result<Self> {
        let c = RadialComponent {
            center: center.into(),
            r_in: radius,
            r_out: radius,
            mass,
            profile: RadialProfile::UniformCircle,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.center.validate()?;
        if !(self.mass > 0.0 && self.mass <= 1.0 + EPS_MASS) {
            return Err(Error::invalid(format!(
                "component mass {} not in (0,1]",
                self.mass
            )));
        }
        let ok = match self.profile {
            RadialProfile::UniformAnnulus => {
                self.r_in.is_finite()
                    && self.r_out.is_finite()
                    && self.r_in >= 0.0
                    && self.r_in < self.r_out
            }
            RadialProfile::UniformCircle => {
                self.r_out.is_finite() && self.r_out > 0.0 && self.r_in == self.r_out
            }
        };
        if !ok {
            return Err(Error::invalid(format!(
                "radial component radii [{}, {}] invalid for {:?}",
                self.r_in, self.r_out, self.profile
            )));
        }
        Ok(())
    }

    /// Distance from `z` to the support of the component.
    pub fn support_distance(&self, z: ComplexPoint) -> f64 {
        let r = z.dist(self.center);
        if r < self.r_in {
            self.r_in - r
        } else if r > self.r_out {
            r - self.r_out
        } else {
            0.0
        }
    }

    /// Point of the component for `u1, u2 ∈ [0,1)`: uniform in area for an
    /// annulus, in arc length for a circle.
    pub fn point_at(&self, u1: f64, u2: f64) -> ComplexPoint {
        let rho = match self.profile {
            RadialProfile::UniformCircle => self.r_out,
            RadialProfile::UniformAnnulus => {
                let a = self.r_in * self.r_in;
                let b = self.r_out * self.r_out;
                (a + u1 * (b - a)).sqrt().clamp(self.r_in, self.r_out)
            }
        };
        ComplexPoint(self.center.0 + Complex64::from_polar(rho, 2.0 * PI * u2))
    }
}

/// Segment containing every unlisted tail atom. Endpoints marked open are
/// limits that no tail atom attains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailHull {
    pub from: ComplexPoint,
    pub to: ComplexPoint,
    pub from_open: bool,
    pub to_open: bool,
}

impl TailHull {
    fn project(&self, z: ComplexPoint) -> ComplexPoint {
        let d = self.to.0 - self.from.0;
        let len2 = d.norm_sqr();
        if len2 == 0.0 {
            return self.from;
        }
        let s = ((z.0 - self.from.0) * d.conj()).re / len2;
        ComplexPoint(self.from.0 + d * s.clamp(0.0, 1.0))
    }

    pub fn distance_to(&self, z: ComplexPoint) -> f64 {
        z.dist(self.project(z))
    }

    /// `(min, max)` distance from `z` over the closed segment.
    pub fn distance_range(&self, z: ComplexPoint) -> (f64, f64) {
        let dmin = self.distance_to(z);
        let dmax = z.dist(self.from).max(z.dist(self.to));
        (dmin, dmax)
    }

    pub fn is_open_endpoint(&self, z: ComplexPoint) -> bool {
        let tol = 1e-15 * (1.0 + z.0.norm());
        (self.from_open && z.dist(self.from) <= tol) || (self.to_open && z.dist(self.to) <= tol)
    }

    /// Largest distance from `z` to a point the tail can occupy.
    pub fn sup_distance(&self, z: ComplexPoint) -> f64 {
        self.distance_range(z).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub n_max: usize,
    pub tail_mass: f64,
    pub hull: TailHull,
}

/// Which generator produced a measure. Analyses attach closed-form rates and
/// accumulation points to the named families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FamilyTag {
    Example1 { p: f64 },
    Example2,
    Example3,
    Custom,
}

/// Mass of a region, exact when `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mass {
    pub lo: f64,
    pub hi: f64,
}

impl Mass {
    pub fn point(v: f64) -> Self {
        Mass { lo: v, hi: v }
    }

    pub fn exact(self) -> Option<f64> {
        (self.lo == self.hi).then_some(self.lo)
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    continuous: Vec<RadialComponent>,
    family: FamilyTag,
    truncation: Option<Truncation>,
    accumulation: Vec<ComplexPoint>,
}

impl AtomicMeasure {
    /// A measure with finitely many parts; total mass must be 1 within
    /// [`EPS_MASS`].
    pub fn new(atoms: Vec<Atom>, continuous: Vec<RadialComponent>) -> Result<Self> {
        Self::assemble(atoms, continuous, FamilyTag::Custom, None, Vec::new())
    }

    pub fn dirac(at: impl Into<ComplexPoint>) -> Self {
        Self::new(vec![Atom::new(at, 1.0)], Vec::new()).expect("unit atom is valid")
    }

    pub(crate) fn assemble(
        atoms: Vec<Atom>,
        continuous: Vec<RadialComponent>,
        family: FamilyTag,
        truncation: Option<Truncation>,
        accumulation: Vec<ComplexPoint>,
    ) -> Result<Self> {
        let m = AtomicMeasure {
            atoms,
            continuous,
            family,
            truncation,
            accumulation,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            a.location.validate()?;
            if !(a.mass > 0.0 && a.mass <= 1.0 + EPS_MASS) {
                return Err(Error::invalid(format!("atom mass {} not in (0,1]", a.mass)));
            }
        }
        for c in &self.continuous {
            c.validate()?;
        }
        if let Some(tr) = &self.truncation {
            tr.hull.from.validate()?;
            tr.hull.to.validate()?;
            if !(tr.tail_mass >= 0.0 && tr.tail_mass.is_finite()) {
                return Err(Error::invalid(format!("tail mass {}", tr.tail_mass)));
            }
        }
        let mut locs: Vec<ComplexPoint> = self.atoms.iter().map(|a| a.location).collect();
        locs.sort_by(|a, b| a.re().total_cmp(&b.re()).then(a.im().total_cmp(&b.im())));
        if let Some(w) = locs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!(
                "duplicate atom location {}",
                w[0].0
            )));
        }
        let total = self.total_mass();
        if !(1.0 - EPS_MASS..=1.0 + EPS_MASS).contains(&total) {
            return Err(Error::invalid(format!("total mass {total} is not 1")));
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn continuous(&self) -> &[RadialComponent] {
        &self.continuous
    }

    pub fn family(&self) -> FamilyTag {
        self.family
    }

    pub fn truncation(&self) -> Option<&Truncation> {
        self.truncation.as_ref()
    }

    /// Known accumulation points of the atoms (empty for finite lists).
    pub fn accumulation_points(&self) -> &[ComplexPoint] {
        &self.accumulation
    }

    pub fn tail_mass(&self) -> f64 {
        self.truncation.map_or(0.0, |t| t.tail_mass)
    }

    pub fn listed_mass(&self) -> f64 {
        let mut s = Neumaier::default();
        for a in &self.atoms {
            s.add(a.mass);
        }
        for c in &self.continuous {
            s.add(c.mass);
        }
        s.value()
    }

    pub fn total_mass(&self) -> f64 {
        self.listed_mass() + self.tail_mass()
    }

    fn atom_index_at(&self, z: ComplexPoint) -> Option<usize> {
        let tol = 1e-15 * (1.0 + z.0.norm());
        self.atoms.iter().position(|a| a.location.dist(z) <= tol)
    }

    fn tail_relation(&self, region: &RegionSpec) -> Relation {
        match &self.truncation {
            Some(tr) if tr.tail_mass > 0.0 => {
                let listed = |z: ComplexPoint| self.atom_index_at(z).is_some();
                region.tail_relation(&tr.hull, &listed)
            }
            _ => Relation::Outside,
        }
    }

    /// `μ(region)`. Atoms count exactly, radial components analytically, and
    /// the tail only when it provably lies inside or outside the region.
    pub fn mass_in(&self, region: &RegionSpec) -> Result<Mass> {
        region.validate()?;
        let mut lo = Neumaier::default();
        let mut hi = Neumaier::default();
        for a in &self.atoms {
            if region.contains(a.location, BOUNDARY_REL_TOL) {
                lo.add(a.mass);
                hi.add(a.mass);
            }
        }
        for c in &self.continuous {
            let f = region.component_fraction(c);
            lo.add(c.mass * f.lo());
            hi.add(c.mass * f.hi());
        }
        match self.tail_relation(region) {
            Relation::Inside => {
                lo.add(self.tail_mass());
                hi.add(self.tail_mass());
            }
            Relation::Outside => {}
            Relation::Unknown => hi.add(self.tail_mass()),
        }
        Ok(Mass {
            lo: lo.value().clamp(0.0, 1.0),
            hi: hi.value().clamp(0.0, 1.0),
        })
    }

    fn atom_at(&self, n: usize) -> Result<&Atom> {
        if n == 0 || n > self.atoms.len() {
            return Err(Error::invalid(format!(
                "atom index {n} out of range 1..={}",
                self.atoms.len()
            )));
        }
        Ok(&self.atoms[n - 1])
    }

    fn has_other_support(&self) -> bool {
        self.atoms.len() >= 2 || !self.continuous.is_empty() || self.tail_mass() > 0.0
    }

    /// Distance from the `n`-th atom (1-based) to the rest of the support:
    /// the smallest `d` for which the punctured ball of radius `d` around it
    /// carries positive mass.
    pub fn nearest_support_gap(&self, n: usize) -> Result<f64> {
        let a = self.atom_at(n)?.location;
        if !self.has_other_support() {
            return Err(Error::NoAdmissibleGap(
                "measure has a single atom and no other support".into(),
            ));
        }
        if let FamilyTag::Example1 { .. } | FamilyTag::Example3 = self.family {
            // Support {1/k}: the nearest point is always 1/(n+1).
            return Ok(1.0 / ((n as f64) * (n as f64 + 1.0)));
        }
        let mut gap = f64::INFINITY;
        for (k, b) in self.atoms.iter().enumerate() {
            if k + 1 != n {
                gap = gap.min(a.dist(b.location));
            }
        }
        for c in &self.continuous {
            gap = gap.min(c.support_distance(a));
        }
        if let Some(tr) = &self.truncation {
            if tr.tail_mass > 0.0 {
                gap = gap.min(tr.hull.distance_to(a));
            }
        }
        Ok(gap)
    }

    /// Largest distance from the `n`-th atom to a later atom or to the tail,
    /// never smaller than the nearest support gap.
    pub fn tail_radius(&self, n: usize) -> Result<f64> {
        let gap = self.nearest_support_gap(n)?;
        let a = self.atoms[n - 1].location;
        let mut r: f64 = 0.0;
        for b in &self.atoms[n..] {
            r = r.max(a.dist(b.location));
        }
        if let Some(tr) = &self.truncation {
            if tr.tail_mass > 0.0 {
                r = r.max(tr.hull.sup_distance(a));
            }
        }
        Ok(r.max(gap))
    }

    /// `μ` restricted to `region` and scaled to total mass 1.
    ///
    /// Radial components that the region cuts must be cut by a concentric
    /// annulus or ball; other cuts are rejected.
    pub fn renormalized_restriction(&self, region: &RegionSpec) -> Result<AtomicMeasure> {
        let mass = self.mass_in(region)?;
        let total = mass.exact().ok_or(Error::UnresolvedTail {
            lo: mass.lo,
            hi: mass.hi,
        })?;
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let atoms: Vec<Atom> = self
            .atoms
            .iter()
            .filter(|a| region.contains(a.location, BOUNDARY_REL_TOL))
            .map(|a| Atom::new(a.location, a.mass / total))
            .collect();
        let mut continuous = Vec::new();
        for c in &self.continuous {
            if let Some(mut kept) = clip_component(c, region)? {
                kept.mass /= total;
                continuous.push(kept);
            }
        }
        let tail_inside = self.tail_mass() > 0.0 && self.tail_relation(region) == Relation::Inside;
        let truncation = if tail_inside {
            self.truncation.map(|t| Truncation {
                tail_mass: t.tail_mass / total,
                ..t
            })
        } else {
            None
        };
        let accumulation = if tail_inside {
            self.accumulation.clone()
        } else {
            Vec::new()
        };
        let unchanged = atoms.len() == self.atoms.len()
            && continuous.len() == self.continuous.len()
            && (total - 1.0).abs() <= EPS_MASS
            && (tail_inside || self.tail_mass() == 0.0);
        let family = if unchanged {
            self.family
        } else {
            FamilyTag::Custom
        };
        let mut out = AtomicMeasure {
            atoms,
            continuous,
            family,
            truncation,
            accumulation,
        };
        out.absorb_rounding();
        out.validate()?;
        Ok(out)
    }

    /// Adds an atom of mass `mass`, scaling every existing part by `1 − mass`.
    /// The result is no longer tagged with a family.
    pub fn with_extra_atom(&self, at: impl Into<ComplexPoint>, mass: f64) -> Result<AtomicMeasure> {
        if !(mass > 0.0 && mass < 1.0) {
            return Err(Error::invalid(format!(
                "extra atom mass {mass} not in (0,1)"
            )));
        }
        let keep = 1.0 - mass;
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.location, a.mass * keep))
            .collect();
        atoms.push(Atom::new(at, mass));
        let continuous = self
            .continuous
            .iter()
            .map(|c| RadialComponent {
                mass: c.mass * keep,
                ..*c
            })
            .collect();
        let truncation = self.truncation.map(|t| Truncation {
            tail_mass: t.tail_mass * keep,
            ..t
        });
        Self::assemble(
            atoms,
            continuous,
            FamilyTag::Custom,
            truncation,
            self.accumulation.clone(),
        )
    }

    /// Image under `z ↦ factor·z`.
    pub fn scaled(&self, factor: Complex64) -> Result<AtomicMeasure> {
        if factor == Complex64::new(0.0, 0.0) || !factor.is_finite() {
            return Err(Error::invalid(format!("scale factor {factor}")));
        }
        let r = factor.norm();
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.location.0 * factor, a.mass))
            .collect();
        let continuous = self
            .continuous
            .iter()
            .map(|c| RadialComponent {
                center: ComplexPoint(c.center.0 * factor),
                r_in: c.r_in * r,
                r_out: c.r_out * r,
                ..*c
            })
            .collect();
        let truncation = self.truncation.map(|t| Truncation {
            hull: TailHull {
                from: ComplexPoint(t.hull.from.0 * factor),
                to: ComplexPoint(t.hull.to.0 * factor),
                ..t.hull
            },
            ..t
        });
        let accumulation = self
            .accumulation
            .iter()
            .map(|p| ComplexPoint(p.0 * factor))
            .collect();
        Self::assemble(
            atoms,
            continuous,
            FamilyTag::Custom,
            truncation,
            accumulation,
        )
    }

    /// Mixture `Σ wᵢ μᵢ` of measures with weights summing to 1. Parts keep
    /// their order; at most one part may carry a truncated tail.
    pub fn mixture(parts: &[(f64, AtomicMeasure)]) -> Result<AtomicMeasure> {
        let mut atoms = Vec::new();
        let mut continuous = Vec::new();
        let mut truncation = None;
        let mut accumulation = Vec::new();
        for (w, m) in parts {
            if !(*w > 0.0 && *w <= 1.0) {
                return Err(Error::invalid(format!("mixture weight {w} not in (0,1]")));
            }
            atoms.extend(m.atoms.iter().map(|a| Atom::new(a.location, a.mass * w)));
            continuous.extend(m.continuous.iter().map(|c| RadialComponent {
                mass: c.mass * w,
                ..*c
            }));
            if let Some(t) = m.truncation {
                if truncation.is_some() {
                    return Err(Error::invalid(
                        "at most one mixture component may be an infinite family",
                    ));
                }
                truncation = Some(Truncation {
                    tail_mass: t.tail_mass * w,
                    ..t
                });
            }
            accumulation.extend_from_slice(&m.accumulation);
        }
        let family = match parts {
            [(_, only)] => only.family,
            _ => FamilyTag::Custom,
        };
        Self::assemble(atoms, continuous, family, truncation, accumulation)
    }

    /// Pushes floating-point excess over 1 out of the largest listed part.
    fn absorb_rounding(&mut self) {
        let excess = self.total_mass() - 1.0;
        if excess <= 0.0 {
            return;
        }
        if let Some(a) = self
            .atoms
            .iter_mut()
            .max_by(|x, y| x.mass.total_cmp(&y.mass))
        {
            if a.mass > excess {
                a.mass -= excess;
            }
        }
    }

    /// Inverse-CDF sampler over the listed parts (renormalized when a tail is
    /// present, since unlisted atoms cannot be drawn).
    pub fn sampler(&self) -> MeasureSampler<'_> {
        let mut cdf = Vec::with_capacity(self.atoms.len() + self.continuous.len());
        let mut acc = Neumaier::default();
        for a in &self.atoms {
            acc.add(a.mass);
            cdf.push(acc.value());
        }
        for c in &self.continuous {
            acc.add(c.mass);
            cdf.push(acc.value());
        }
        MeasureSampler {
            measure: self,
            cdf,
            total: acc.value(),
        }
    }

    /// Deterministic point for `u ∈ [0,1)³`; `u[0]` chooses the part and the
    /// other two place the point inside a radial component.
    pub fn sample_point(&self, u: [f64; 3]) -> ComplexPoint {
        self.sampler().sample(u)
    }
}

fn clip_component(c: &RadialComponent, region: &RegionSpec) -> Result<Option<RadialComponent>> {
    let f = match region.component_fraction(c) {
        Fraction::Exact(f) => f,
        Fraction::Bounds(..) => {
            return Err(Error::UnsupportedRestriction(
                "overlapping union cut of a radial component".into(),
            ))
        }
    };
    if f <= 0.0 {
        return Ok(None);
    }
    if f >= 1.0 {
        return Ok(Some(*c));
    }
    let concentric =
        |center: &ComplexPoint| c.center.dist(*center) <= 1e-15 * (1.0 + center.0.norm());
    let cut = |r_in: f64, r_out: f64| -> Result<Option<RadialComponent>> {
        let lo = c.r_in.max(r_in);
        let hi = c.r_out.min(r_out);
        if hi <= lo {
            return Ok(None);
        }
        Ok(Some(RadialComponent {
            r_in: lo,
            r_out: hi,
            mass: c.mass * f,
            ..*c
        }))
    };
    match region {
        RegionSpec::ClosedAnnulus {
            center,
            r_in,
            r_out,
        } if concentric(center) => cut(*r_in, *r_out),
        RegionSpec::PuncturedBall { center, radius } if concentric(center) => cut(0.0, *radius),
        RegionSpec::Union { parts } => {
            let live: Vec<&RegionSpec> = parts
                .iter()
                .filter(|p| p.component_fraction(c).hi() > 0.0)
                .collect();
            match live.as_slice() {
                [only] => clip_component(c, only),
                _ => Err(Error::UnsupportedRestriction(
                    "radial component split across several union parts".into(),
                )),
            }
        }
        _ => Err(Error::UnsupportedRestriction(
            "radial components can only be cut by concentric annuli or balls".into(),
        )),
    }
}

pub struct MeasureSampler<'a> {
    measure: &'a AtomicMeasure,
    cdf: Vec<f64>,
    total: f64,
}

impl MeasureSampler<'_> {
    pub fn sample(&self, u: [f64; 3]) -> ComplexPoint {
        let target = u[0].clamp(0.0, 1.0) * self.total;
        let idx = self
            .cdf
            .partition_point(|&c| c <= target)
            .min(self.cdf.len() - 1);
        let m = self.measure;
        if idx < m.atoms.len() {
            m.atoms[idx].location
        } else {
            m.continuous[idx - m.atoms.len()].point_at(u[1], u[2])
        }
    }
}
