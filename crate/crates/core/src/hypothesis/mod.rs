//! Which non-spectrality criteria an atomic measure satisfies.
//!
//! Three tests are run against a measure:
//!
//! * an atom sitting on an accumulation point of the support (the angle
//!   between the atom's subspace and its complement is then 0);
//! * `inf_n d_n²/(m_n+t_n) = 0`, which rules out a uniformly nonzero angle;
//! * `inf_n d_n²/t_n = 0`, which rules out a nonzero angle,
//!
//! where `t_n` is the mass of atom `a_n` and `m_n` the mass of the punctured
//! ball of radius `d_n` around it. Infima over infinite sequences are decided
//! by [`trend::detect_trend`] on the computed prefix.

mod example3;
mod subsequence;
pub mod trend;

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::bounds::{lemma1_cos_weak, nza_chain_cos, unza_chain_cos};
use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, ComplexPoint, FamilyTag, Mass, RegionSpec};
use crate::par::{map_indexed, ExecMode};

pub use example3::{
    critical_points, example3_log_bound, example3_min_bound, example3_min_bound_fast,
    log_half_f_squared, r_branch_limit, Example3Analysis, PointValue,
};
pub use subsequence::{
    first_intersection, select_nza_subsequence, Candidate, PuncturedBall, SubsequenceSelection,
};
pub use trend::{detect_trend, Sample, Trend, TrendFit};

/// Relative slack when checking a supplied `d_n` against the support gap.
const GAP_REL_TOL: f64 = 1e-12;

/// How `d_n` is chosen for each atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DStrategy {
    /// Distance to the nearest other support point.
    MinGap,
    /// Distance covering every later atom and the unlisted tail.
    TailRadius,
    /// Explicit values; entry `n−1` is `d_n`.
    Custom(Vec<f64>),
}

impl DStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            DStrategy::MinGap => "min_gap",
            DStrategy::TailRadius => "tail_radius",
            DStrategy::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Nza,
    Unza,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionTrace {
    pub n: usize,
    pub a_n: ComplexPoint,
    pub t_n: f64,
    pub d_n: f64,
    pub m_n: Mass,
    /// `d²/(m_lo + t)`: the ratio is at most this.
    pub ratio_unza: f64,
    /// `d²/(m_hi + t)`: the ratio is at least this.
    pub ratio_unza_lo: f64,
    pub ratio_nza: f64,
    /// Chain bound of the criterion the trace was built for, using `m_lo`.
    pub chain_cos: f64,
}

impl CriterionTrace {
    /// `(lo, hi)` of the ratio relevant to `criterion`.
    pub fn ratio(&self, criterion: Criterion) -> (f64, f64) {
        match criterion {
            Criterion::Nza => (self.ratio_nza, self.ratio_nza),
            Criterion::Unza => (self.ratio_unza_lo, self.ratio_unza),
        }
    }
}

fn choose_d(measure: &AtomicMeasure, strategy: &DStrategy, n: usize) -> Result<(f64, f64)> {
    let gap = measure.nearest_support_gap(n)?;
    let d = match strategy {
        DStrategy::MinGap => gap,
        DStrategy::TailRadius => measure.tail_radius(n)?,
        DStrategy::Custom(list) => *list
            .get(n - 1)
            .ok_or_else(|| Error::invalid(format!("custom d list has no entry for n = {n}")))?,
    };
    Ok((d, gap))
}

/// One trace row for atom `n` (1-based).
pub fn criterion_trace(
    measure: &AtomicMeasure,
    c: f64,
    strategy: &DStrategy,
    n: usize,
    criterion: Criterion,
) -> Result<CriterionTrace> {
    let (d, gap) = choose_d(measure, strategy, n)?;
    if !(d.is_finite() && d > 0.0) {
        if gap == 0.0 {
            return Err(Error::NoAdmissibleGap(format!(
                "atom {n} touches the rest of the support; no positive minimal d_n"
            )));
        }
        return Err(Error::invalid(format!("d_{n} = {d} must be positive")));
    }
    if d < gap * (1.0 - GAP_REL_TOL) {
        return Err(Error::ZeroPuncturedMass { index: n, d, gap });
    }
    let atom = measure.atoms()[n - 1];
    let t = atom.mass;
    let m = measure.mass_in(&RegionSpec::punctured_ball(atom.location, d))?;
    if m.hi <= 0.0 {
        return Err(Error::ZeroPuncturedMass { index: n, d, gap });
    }
    let d2 = d * d;
    let chain = match criterion {
        Criterion::Nza => nza_chain_cos(d, c, t)?,
        Criterion::Unza => unza_chain_cos(d, c, m.lo, t)?,
    };
    Ok(CriterionTrace {
        n,
        a_n: atom.location,
        t_n: t,
        d_n: d,
        m_n: m,
        ratio_unza: d2 / (m.lo + t),
        ratio_unza_lo: d2 / (m.hi + t),
        ratio_nza: d2 / t,
        chain_cos: chain.cos_lower,
    })
}

fn check_range(measure: &AtomicMeasure, range: &RangeInclusive<usize>) -> Result<()> {
    if *range.start() == 0 || *range.end() > measure.atoms().len() || range.is_empty() {
        return Err(Error::invalid(format!(
            "index range {}..={} outside 1..={}",
            range.start(),
            range.end(),
            measure.atoms().len()
        )));
    }
    if measure.atoms().len() < 2 && measure.continuous().is_empty() && measure.tail_mass() == 0.0 {
        return Err(Error::NoAdmissibleGap("measure has a single atom".into()));
    }
    Ok(())
}

fn sequence(
    measure: &AtomicMeasure,
    c: f64,
    strategy: &DStrategy,
    range: RangeInclusive<usize>,
    criterion: Criterion,
    exec: ExecMode,
) -> Result<Vec<CriterionTrace>> {
    check_range(measure, &range)?;
    let start = *range.start();
    let len = range.end() - start + 1;
    map_indexed(len, exec, |i| {
        criterion_trace(measure, c, strategy, start + i, criterion)
    })
    .into_iter()
    .collect()
}

/// Rows `d_n²/(m_n+t_n)` with the chain bound `(1 + 4d²/(c²(m+t)))^{-1/2}`.
pub fn unza_sequence(
    measure: &AtomicMeasure,
    c: f64,
    strategy: &DStrategy,
    range: RangeInclusive<usize>,
    exec: ExecMode,
) -> Result<Vec<CriterionTrace>> {
    sequence(measure, c, strategy, range, Criterion::Unza, exec)
}

/// Rows `d_n²/t_n` with the chain bound `(1 + 2d²/(c²t))^{-1/2}`.
pub fn nza_sequence(
    measure: &AtomicMeasure,
    c: f64,
    strategy: &DStrategy,
    range: RangeInclusive<usize>,
    exec: ExecMode,
) -> Result<Vec<CriterionTrace>> {
    sequence(measure, c, strategy, range, Criterion::Nza, exec)
}

// ---------------------------------------------------------------------------
// Atom on an accumulation point

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusStep {
    pub s: f64,
    pub s_prime: f64,
    /// Mass of the annulus `s' ≤ |z − a| ≤ s`.
    pub annulus_mass: Mass,
    /// Guaranteed lower end of `μ({a} ∪ annulus)`.
    pub mass_b_lo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Theorem2Status {
    Yes {
        atom: ComplexPoint,
        index: usize,
        witness: Vec<AnnulusStep>,
    },
    No {
        reason: String,
    },
}

impl Theorem2Status {
    pub fn applies(&self) -> bool {
        matches!(self, Theorem2Status::Yes { .. })
    }
}

const WITNESS_STEPS: u32 = 10;

fn support_radius(measure: &AtomicMeasure, a: ComplexPoint) -> f64 {
    let mut r: f64 = 0.0;
    for b in measure.atoms() {
        r = r.max(a.dist(b.location));
    }
    for c in measure.continuous() {
        r = r.max(a.dist(c.center) + c.r_out);
    }
    if let Some(tr) = measure.truncation() {
        r = r.max(tr.hull.sup_distance(a));
    }
    r
}

fn shrinking_annuli(measure: &AtomicMeasure, index: usize) -> Result<Vec<AnnulusStep>> {
    let atom = measure.atoms()[index - 1];
    let big_r = support_radius(measure, atom.location);
    let mut steps = Vec::new();
    for j in 1..=WITNESS_STEPS {
        let s = big_r * 0.5f64.powi(j as i32);
        let mut s_prime = 0.5 * s;
        let mut mass = measure.mass_in(&RegionSpec::closed_annulus(atom.location, s_prime, s))?;
        let mut halvings = 0;
        while mass.hi <= 0.0 && halvings < 60 {
            s_prime *= 0.5;
            halvings += 1;
            mass = measure.mass_in(&RegionSpec::closed_annulus(atom.location, s_prime, s))?;
        }
        if mass.hi > 0.0 {
            steps.push(AnnulusStep {
                s,
                s_prime,
                annulus_mass: mass,
                mass_b_lo: atom.mass + mass.lo,
            });
        }
    }
    Ok(steps)
}

/// Whether some atom lies within `tol` of an accumulation point of the
/// support. Accumulation points are the recorded limits of infinite families
/// and every point of a radial component's support.
pub fn check_theorem2(measure: &AtomicMeasure, tol: f64) -> Result<Theorem2Status> {
    let acc = measure.accumulation_points();
    if acc.is_empty() && measure.continuous().is_empty() {
        return Ok(Theorem2Status::No {
            reason: "finite support".into(),
        });
    }
    for (i, a) in measure.atoms().iter().enumerate() {
        let on_limit = acc.iter().any(|p| p.dist(a.location) <= tol);
        let on_continuum = measure
            .continuous()
            .iter()
            .any(|c| c.support_distance(a.location) <= tol);
        if on_limit || on_continuum {
            return Ok(Theorem2Status::Yes {
                atom: a.location,
                index: i + 1,
                witness: shrinking_annuli(measure, i + 1)?,
            });
        }
    }
    let mut reasons: Vec<String> = acc
        .iter()
        .map(|p| format!("accumulation point {} carries no atom", fmt_point(*p)))
        .collect();
    if !measure.continuous().is_empty() {
        reasons.push("no atom lies on the support of a continuous component".into());
    }
    Ok(Theorem2Status::No {
        reason: reasons.join("; "),
    })
}

fn fmt_point(p: ComplexPoint) -> String {
    if p.im() == 0.0 {
        format!("{}", p.re())
    } else {
        format!("{}", p.0)
    }
}

// ---------------------------------------------------------------------------
// Reference rates attached to the named families

/// `ln` of the closed-form rate each family's ratio is compared against,
/// for the default strategies only.
#[derive(Debug, Clone, Copy)]
pub struct FamilyRate {
    pub description: &'static str,
    pub log_rate: fn(f64, f64) -> f64,
    pub param: f64,
}

const C2: f64 = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);

fn rate_ex1_nza(n: f64, p: f64) -> f64 {
    (p - 4.0) * n.ln()
}
fn rate_ex1_unza(n: f64, p: f64) -> f64 {
    (p - 3.0) * n.ln()
}
fn rate_ex2_unza(n: f64, _: f64) -> f64 {
    2.0 * (1.0 + n.ln()).ln() - n.ln() - C2.ln()
}
/// The Example 2 text states the gap as `ln(n+1)/(n+1)`, which makes the
/// ratio `ln²(n+1)·n²/(C(n+1)²)`.
fn rate_ex2_nza_stated(n: f64, _: f64) -> f64 {
    2.0 * (n + 1.0).ln().ln() + 2.0 * n.ln() - 2.0 * (n + 1.0).ln() - C2.ln()
}
fn rate_ex3_nza(n: f64, _: f64) -> f64 {
    n * std::f64::consts::LN_2 - 4.0 * n.ln()
}
fn rate_ex3_unza(n: f64, _: f64) -> f64 {
    0.5 * n * std::f64::consts::LN_2 - 2.0 * n.ln()
}

pub fn family_rate(family: FamilyTag, criterion: Criterion) -> Option<FamilyRate> {
    let r = |description, log_rate, param| {
        Some(FamilyRate {
            description,
            log_rate,
            param,
        })
    };
    match (family, criterion) {
        (FamilyTag::Example1 { p }, Criterion::Nza) => r("n^(p-4)/C_p", rate_ex1_nza, p),
        (FamilyTag::Example1 { p }, Criterion::Unza) => r("n^(p-3)", rate_ex1_unza, p),
        (FamilyTag::Example2, Criterion::Unza) => r("(1+ln n)^2/(C n)", rate_ex2_unza, 0.0),
        (FamilyTag::Example2, Criterion::Nza) => r(
            "ln(n+1)^2 n^2/(C (n+1)^2) (from the stated gap ln(n+1)/(n+1))",
            rate_ex2_nza_stated,
            0.0,
        ),
        (FamilyTag::Example3, Criterion::Nza) => r("2^n/n^4", rate_ex3_nza, 0.0),
        (FamilyTag::Example3, Criterion::Unza) => r("2^(n/2)/n^2", rate_ex3_unza, 0.0),
        (FamilyTag::Custom, _) => None,
    }
}

// ---------------------------------------------------------------------------
// Classification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "fails_NZA")]
    FailsNza,
    #[serde(rename = "fails_UNZA")]
    FailsUnza,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::FailsNza => "fails_NZA",
            Verdict::FailsUnza => "fails_UNZA",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub nza_strategy: DStrategy,
    pub unza_strategy: DStrategy,
    /// Defaults to every listed atom.
    pub n_range: Option<(usize, usize)>,
    pub tol: f64,
    pub exec: ExecMode,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            nza_strategy: DStrategy::MinGap,
            unza_strategy: DStrategy::TailRadius,
            n_range: None,
            tol: 1e-12,
            exec: ExecMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub strategy: String,
    pub inf_estimate: f64,
    pub trend: Trend,
    pub reference_rate: Option<String>,
    pub fit: TrendFit,
    /// Indices skipped because no positive `d_n` was admissible.
    pub skipped: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub criterion: String,
    pub sequence: Vec<WitnessPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    pub numeric_gap: f64,
    pub stated_gap: f64,
    pub closed_form_gap: f64,
    pub numeric_ratio_nza: f64,
    pub stated_ratio_nza: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub family: FamilyTag,
    pub c: f64,
    pub n_range: (usize, usize),
    pub theorem2_applies: Theorem2Status,
    /// `(1 + 2s²/(c²μ(B)))^{-1/2}` along the witness annuli.
    pub theorem2_bounds: Vec<f64>,
    pub nza: CriterionSummary,
    pub unza: CriterionSummary,
    pub unza_inf_estimate: f64,
    pub unza_trend: Trend,
    pub nza_inf_estimate: f64,
    pub nza_trend: Trend,
    pub verdict: Verdict,
    /// Failing NZA also fails UNZA.
    pub implies_fails_unza: bool,
    pub witness: Option<Witness>,
    pub selection: Option<SubsequenceSelection>,
    pub gap_discrepancy: Option<Vec<GapRow>>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub nza_traces: Vec<CriterionTrace>,
    pub unza_traces: Vec<CriterionTrace>,
}

fn lenient_traces(
    measure: &AtomicMeasure,
    c: f64,
    strategy: &DStrategy,
    range: &RangeInclusive<usize>,
    criterion: Criterion,
    exec: ExecMode,
) -> Result<(Vec<CriterionTrace>, Vec<usize>)> {
    let start = *range.start();
    let len = range.end() - start + 1;
    let rows = map_indexed(len, exec, |i| {
        criterion_trace(measure, c, strategy, start + i, criterion)
    });
    let mut traces = Vec::with_capacity(len);
    let mut skipped = Vec::new();
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok(t) => traces.push(t),
            Err(Error::NoAdmissibleGap(_)) => skipped.push(start + i),
            Err(e) => return Err(e),
        }
    }
    Ok((traces, skipped))
}

fn summarize(
    family: FamilyTag,
    strategy: &DStrategy,
    default: &DStrategy,
    traces: &[CriterionTrace],
    skipped: Vec<usize>,
    criterion: Criterion,
) -> CriterionSummary {
    let samples: Vec<Sample> = traces
        .iter()
        .map(|t| {
            let (lo, hi) = t.ratio(criterion);
            Sample { n: t.n, lo, hi }
        })
        .collect();
    let rate = if strategy == default {
        family_rate(family, criterion)
    } else {
        None
    };
    let fit = match &rate {
        Some(r) => {
            let f = |n: f64| (r.log_rate)(n, r.param);
            detect_trend(&samples, Some(&f))
        }
        None => detect_trend(&samples, None),
    };
    CriterionSummary {
        strategy: strategy.label().to_string(),
        inf_estimate: fit.inf_estimate,
        trend: fit.trend,
        reference_rate: rate.map(|r| r.description.to_string()),
        fit,
        skipped,
    }
}

fn envelope_witness(name: &str, summary: &CriterionSummary) -> Witness {
    let blocks = &summary.fit.blocks;
    let k = trend::MIN_BLOCKS.max(blocks.len() / 2).min(blocks.len());
    Witness {
        criterion: name.to_string(),
        sequence: blocks[blocks.len() - k..]
            .iter()
            .map(|b| WitnessPoint {
                n: b.argmax,
                value: b.max,
            })
            .collect(),
    }
}

fn example2_gap_rows(measure: &AtomicMeasure) -> Result<Vec<GapRow>> {
    let n_atoms = measure.atoms().len();
    let mut rows = Vec::new();
    for n in [1usize, 2, 10, 100, 1000, 10_000] {
        if n >= n_atoms {
            break;
        }
        let nf = n as f64;
        let numeric = measure.nearest_support_gap(n)?;
        let t = measure.atoms()[n - 1].mass;
        let stated = (nf + 1.0).ln() / (nf + 1.0);
        rows.push(GapRow {
            n,
            numeric_gap: numeric,
            stated_gap: stated,
            closed_form_gap: (nf + 1.0).ln() / ((nf + 1.0) * (nf + 1.0)),
            numeric_ratio_nza: numeric * numeric / t,
            stated_ratio_nza: stated * stated / t,
        });
    }
    Ok(rows)
}

/// Runs every criterion with the configured strategies and combines them.
pub fn classify(
    measure: &AtomicMeasure,
    c: f64,
    options: &ClassifyOptions,
) -> Result<HypothesisReport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid(format!("c = {c} must be positive")));
    }
    let n_atoms = measure.atoms().len();
    let (lo, hi) = options.n_range.unwrap_or((1, n_atoms));
    let range = lo..=hi;
    check_range(measure, &range)?;
    let family = measure.family();
    let mut warnings = Vec::new();
    let mut notes = Vec::new();

    let theorem2 = check_theorem2(measure, options.tol)?;
    let theorem2_bounds = match &theorem2 {
        Theorem2Status::Yes { witness, .. } => witness
            .iter()
            .map(|w| lemma1_cos_weak(w.s, c * w.mass_b_lo.sqrt()).map(|b| b.cos_lower))
            .collect::<Result<Vec<_>>>()?,
        Theorem2Status::No { .. } => Vec::new(),
    };

    let (nza_traces, nza_skipped) = lenient_traces(
        measure,
        c,
        &options.nza_strategy,
        &range,
        Criterion::Nza,
        options.exec,
    )?;
    let (unza_traces, unza_skipped) = lenient_traces(
        measure,
        c,
        &options.unza_strategy,
        &range,
        Criterion::Unza,
        options.exec,
    )?;
    let nza = summarize(
        family,
        &options.nza_strategy,
        &DStrategy::MinGap,
        &nza_traces,
        nza_skipped,
        Criterion::Nza,
    );
    let unza = summarize(
        family,
        &options.unza_strategy,
        &DStrategy::TailRadius,
        &unza_traces,
        unza_skipped,
        Criterion::Unza,
    );
    for (name, s) in [("NZA", &nza), ("UNZA", &unza)] {
        if !s.skipped.is_empty() {
            notes.push(format!(
                "{name}: {} atoms touch the rest of the support and were skipped",
                s.skipped.len()
            ));
        }
        if s.trend == Trend::Undetermined {
            warnings.push(format!("{name} trend undetermined: {}", s.fit.reason));
        }
    }
    let unresolved = unza_traces
        .iter()
        .filter(|t| t.m_n.exact().is_none())
        .count();
    if unresolved > 0 {
        notes.push(format!(
            "{unresolved} UNZA rows have m_n known only as an interval (truncated tail); their ratios are bracketed"
        ));
    }

    let gap_discrepancy = if family == FamilyTag::Example2 {
        let rows = example2_gap_rows(measure)?;
        warnings.push(
            "gap discrepancy: the reference rate assumes a_{n+1} - a_n = ln(n+1)/(n+1), but the atoms give \
             ln(n+1)/(n+1)^2; the NZA ratio is compared against that rate and \
             the numeric gap is reported alongside"
                .into(),
        );
        Some(rows)
    } else {
        None
    };

    let fails_nza = theorem2.applies() || nza.trend == Trend::TendsToZero;
    let fails_unza = unza.trend == Trend::TendsToZero;
    let verdict = if fails_nza {
        Verdict::FailsNza
    } else if fails_unza {
        Verdict::FailsUnza
    } else {
        Verdict::Inconclusive
    };

    let mut selection = None;
    let witness = match verdict {
        Verdict::FailsNza if theorem2.applies() => {
            let seq = match &theorem2 {
                Theorem2Status::Yes { witness, .. } => witness
                    .iter()
                    .zip(&theorem2_bounds)
                    .enumerate()
                    .map(|(j, (_, b))| WitnessPoint {
                        n: j + 1,
                        value: *b,
                    })
                    .collect(),
                Theorem2Status::No { .. } => Vec::new(),
            };
            Some(Witness {
                criterion: "atom_at_accumulation_point".into(),
                sequence: seq,
            })
        }
        Verdict::FailsNza => {
            let limit = measure.accumulation_points().first().copied();
            match limit {
                Some(l) => {
                    let cands: Vec<Candidate> = nza_traces
                        .iter()
                        .map(|t| Candidate {
                            n: t.n,
                            location: t.a_n,
                            d: t.d_n,
                        })
                        .collect();
                    match select_nza_subsequence(&cands, l) {
                        Ok(sel) => selection = Some(sel),
                        Err(e) => warnings.push(format!("subsequence selection: {e}")),
                    }
                }
                None => notes.push("no recorded limit point; subsequence selection skipped".into()),
            }
            Some(envelope_witness("nza_ratio", &nza))
        }
        Verdict::FailsUnza => Some(envelope_witness("unza_ratio", &unza)),
        Verdict::Inconclusive => None,
    };

    Ok(HypothesisReport {
        family,
        c,
        n_range: (lo, hi),
        theorem2_applies: theorem2,
        theorem2_bounds,
        unza_inf_estimate: unza.inf_estimate,
        unza_trend: unza.trend,
        nza_inf_estimate: nza.inf_estimate,
        nza_trend: nza.trend,
        nza,
        unza,
        verdict,
        implies_fails_unza: verdict == Verdict::FailsNza,
        witness,
        selection,
        gap_discrepancy,
        warnings,
        notes,
        nza_traces,
        unza_traces,
    })
}

/// Writes traces with columns
/// `n, re_a_n, im_a_n, t_n, d_n, m_n_lo, m_n_hi, ratio_unza, ratio_nza, chain_cos`.
pub fn write_traces_csv<W: std::io::Write>(traces: &[CriterionTrace], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "re_a_n",
        "im_a_n",
        "t_n",
        "d_n",
        "m_n_lo",
        "m_n_hi",
        "ratio_unza",
        "ratio_nza",
        "chain_cos",
    ])?;
    for t in traces {
        w.write_record(&[
            t.n.to_string(),
            fmt_f(t.a_n.re()),
            fmt_f(t.a_n.im()),
            fmt_f(t.t_n),
            fmt_f(t.d_n),
            fmt_f(t.m_n.lo),
            fmt_f(t.m_n.hi),
            fmt_f(t.ratio_unza),
            fmt_f(t.ratio_nza),
            fmt_f(t.chain_cos),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that round-trips.
pub(crate) fn fmt_f(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{example1, example2, example3, Atom};

    #[test]
    fn example1_ratio_at_ten() {
        let m = example1(2.0, 100).unwrap();
        let tr = nza_sequence(&m, 1.0, &DStrategy::MinGap, 10..=10, ExecMode::Sequential).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((tr[0].ratio_nza - pi2 / 726.0).abs() < 1e-12);
        assert!(tr[0].ratio_nza <= pi2 / 600.0);
    }

    #[test]
    fn example3_nza_at_five() {
        let m = example3(50).unwrap();
        let tr = nza_sequence(&m, 1.0, &DStrategy::MinGap, 5..=5, ExecMode::Sequential).unwrap();
        assert!((tr[0].ratio_nza - 32.0 / 900.0).abs() < 1e-15);
    }

    #[test]
    fn two_atoms_unit_ratio() {
        let m = AtomicMeasure::new(vec![Atom::new(0.0, 0.5), Atom::new(1.0, 0.5)], vec![]).unwrap();
        let tr = unza_sequence(
            &m,
            1.0,
            &DStrategy::Custom(vec![1.0, 1.0]),
            1..=1,
            ExecMode::Sequential,
        )
        .unwrap();
        assert_eq!(tr[0].ratio_unza, 1.0);
    }

    #[test]
    fn d_below_gap_is_rejected() {
        let m = example3(20).unwrap();
        let err = nza_sequence(
            &m,
            1.0,
            &DStrategy::Custom(vec![1e-4; 20]),
            3..=3,
            ExecMode::Sequential,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ZeroPuncturedMass { index: 3, .. }));
    }

    #[test]
    fn example2_tail_radius_bound() {
        let m = example2(1000).unwrap();
        let tr = unza_sequence(
            &m,
            1.0,
            &DStrategy::TailRadius,
            100..=100,
            ExecMode::Sequential,
        )
        .unwrap();
        let n = 100f64;
        assert!(tr[0].d_n <= (1.0 + n.ln()) / n);
        assert!(tr[0].ratio_unza <= (1.0 + n.ln()).powi(2) / (C2 * n));
    }

    #[test]
    fn theorem2_cases() {
        let ex3 = example3(200).unwrap();
        match check_theorem2(&ex3, 1e-12).unwrap() {
            Theorem2Status::No { reason } => {
                assert!(reason.contains("accumulation point 0 carries no atom"))
            }
            other => panic!("{other:?}"),
        }
        let with_zero = ex3.with_extra_atom(0.0, 0.25).unwrap();
        match check_theorem2(&with_zero, 1e-12).unwrap() {
            Theorem2Status::Yes { atom, witness, .. } => {
                assert_eq!(atom, ComplexPoint::real(0.0));
                assert!(!witness.is_empty());
            }
            other => panic!("{other:?}"),
        }
        match check_theorem2(&AtomicMeasure::dirac(1.0), 1e-12).unwrap() {
            Theorem2Status::No { reason } => assert_eq!(reason, "finite support"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verdicts_for_the_three_families() {
        let opts = ClassifyOptions::default();
        let r1 = classify(&example1(2.0, 1000).unwrap(), 1.0, &opts).unwrap();
        assert_eq!(r1.verdict, Verdict::FailsNza);
        assert!(r1.implies_fails_unza && r1.witness.is_some() && r1.selection.is_some());
        let r2 = classify(&example2(1000).unwrap(), 1.0, &opts).unwrap();
        assert_eq!(r2.verdict, Verdict::FailsUnza);
        assert_eq!(r2.nza_trend, Trend::Undetermined);
        assert!(r2.gap_discrepancy.is_some());
        let r3 = classify(&example3(1000).unwrap(), 1.0, &opts).unwrap();
        assert_eq!(r3.verdict, Verdict::Inconclusive);
        assert_eq!(r3.nza_trend, Trend::BoundedAway);
        assert_eq!(r3.unza_trend, Trend::BoundedAway);
    }
}
