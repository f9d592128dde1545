//! Invariant subspaces of sampled block models, the angle between them, and
//! the two experiments that compare measured cosines with the closed-form
//! lower bounds.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{lemma1_cos_lower, lemma1_cos_weak, AngleBound};
use crate::error::{Error, Result};
use crate::matmodel::{
    build_similarity, compute_y_series, embed_top_right, sample_block_model, support_moduli,
    tau_frob, trial_rng, verify_conjugation, BlockModel, DiagonalPolicy, Orientation, TrialRecord,
};
use crate::measure::{example1, Atom, AtomicMeasure, ComplexPoint, RadialComponent, RegionSpec};
use crate::numkernel::{
    invert_upper_triangular, operator_norm, schur_ordered, svd_values, sylvester_relative_residual,
    sylvester_solve, ComplexMatrix, TOL_BOUND,
};
use crate::par::{map_indexed, ExecMode};

#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    /// Orthonormal columns.
    pub basis: ComplexMatrix,
    pub region: RegionSpec,
    pub dim: usize,
    /// Eigenvalues found within `TOL_BOUND` of the region boundary.
    pub warnings: Vec<String>,
}

/// Span of the leading Schur vectors once the eigenvalues in `region` are
/// ordered first. Eigenvalues within `TOL_BOUND` of the boundary count as
/// inside and are reported.
pub fn spectral_subspace(z: &ComplexMatrix, region: &RegionSpec) -> Result<SubspaceBasis> {
    if !z.is_square() {
        return Err(Error::Dimension(format!(
            "spectral subspace of a {}x{} matrix",
            z.rows(),
            z.cols()
        )));
    }
    region.validate()?;
    let near = |l: Complex64| region.boundary_distance(ComplexPoint(l)) <= TOL_BOUND;
    let inside = |l: Complex64| region.contains(ComplexPoint(l), 0.0) || near(l);
    let form = schur_ordered(z, inside)?;
    let warnings = form
        .eigenvalues()
        .into_iter()
        .filter(|&l| near(l))
        .map(|l| {
            format!(
                "eigenvalue {l} lies within {TOL_BOUND:e} of the region boundary; counted inside"
            )
        })
        .collect();
    Ok(SubspaceBasis {
        basis: form.unitary.leading_columns(form.selected),
        region: region.clone(),
        dim: form.selected,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalAngles {
    pub cos_alpha: f64,
    /// Nonincreasing.
    pub principal_cosines: Vec<f64>,
}

/// Singular values of `Uᴴ·V`; the largest is the cosine of the angle.
pub fn principal_cos(u: &SubspaceBasis, v: &SubspaceBasis) -> Result<PrincipalAngles> {
    if u.basis.rows() != v.basis.rows() {
        return Err(Error::Dimension(format!(
            "subspaces of C^{} and C^{}",
            u.basis.rows(),
            v.basis.rows()
        )));
    }
    if u.dim == 0 || v.dim == 0 {
        return Err(Error::invalid("principal angles need nonzero subspaces"));
    }
    let cosines: Vec<f64> = svd_values(&u.basis.adjoint_matmul(&v.basis)?)
        .into_iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect();
    Ok(PrincipalAngles {
        cos_alpha: cosines[0],
        principal_cosines: cosines,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleMeasurement {
    pub cos_alpha: f64,
    pub principal_cosines: Vec<f64>,
    pub bound: AngleBound,
    /// `cos_alpha ≥ bound.cos_lower − slack`.
    pub satisfied: bool,
}

impl AngleMeasurement {
    pub fn against(angles: PrincipalAngles, bound: AngleBound, slack: f64) -> Self {
        AngleMeasurement {
            satisfied: angles.cos_alpha >= bound.cos_lower - slack,
            cos_alpha: angles.cos_alpha,
            principal_cosines: angles.principal_cosines,
            bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    /// Means are compared with `mean_factor · bound`.
    pub mean_factor: f64,
    /// Single trials are compared with `bound − min_additive`.
    pub min_additive: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Slack {
            mean_factor: 0.9,
            min_additive: 0.1,
        }
    }
}

const SLACK_NOTE: &str =
    "the bounds are limit statements for the operator; finite-N comparisons use the stated slack";

/// Regions used to split the spectrum of a block model whose nonzero
/// eigenvalues have moduli in `[s′, s]`: the disk of radius `s′/2` and the
/// annulus widened by `s′/2` on each side, so no eigenvalue sits on a boundary.
pub fn split_regions(s_prime: f64, s: f64) -> (RegionSpec, RegionSpec) {
    let h = 0.5 * s_prime;
    (
        RegionSpec::closed_annulus(0.0, 0.0, h),
        RegionSpec::closed_annulus(0.0, h, s + h),
    )
}

/// Everything measured on one block-model instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMeasurement {
    pub dim_zero: usize,
    pub dim_annulus: usize,
    pub cos_alpha: f64,
    pub principal_cosines: Vec<f64>,
    #[serde(rename = "sigma_max_Y")]
    pub sigma_max_y: f64,
    /// `|cos_alpha − σ/√(1+σ²)|`.
    pub cos_identity_error: f64,
    #[serde(rename = "tau_frob_Y")]
    pub tau_frob_y: f64,
    pub tau_frob_z2_inv: f64,
    pub residual_conjugation: f64,
    pub sylvester_residual: f64,
    /// `‖Y_series − Y_sylvester‖ / ‖Y_sylvester‖`.
    pub series_vs_sylvester: f64,
    /// `max |(I+Y)(I−Y) − I|`.
    pub similarity_identity_error: f64,
    pub warnings: Vec<String>,
}

/// Computes `Y` two ways, the similarity, both spectral subspaces and their
/// angle. `Y` is embedded in the full `N×N` matrix for `tau_frob_Y`.
pub fn measure_block(block: &BlockModel, s_prime: f64, s: f64) -> Result<BlockMeasurement> {
    let n = block.n();
    let y = compute_y_series(block)?;
    let sylvester_residual =
        sylvester_relative_residual(block.top(), block.bottom(), &block.corner, &y)?;
    let oracle = sylvester_solve(block.top(), block.bottom(), &block.corner)?;
    let on = oracle.frobenius_norm();
    let series_vs_sylvester = y.sub(&oracle)?.frobenius_norm() / if on > 0.0 { on } else { 1.0 };

    let y_embedded = embed_top_right(&y, n)?;
    let (sim, sim_inv) = build_similarity(&y_embedded, block.split())?;
    let residual_conjugation = verify_conjugation(block, &sim, &sim_inv)?;
    let similarity_identity_error = sim
        .matmul(&sim_inv)?
        .sub(&ComplexMatrix::identity(n))?
        .max_abs();

    let (zero_region, annulus_region) = split_regions(s_prime, s);
    let zero = spectral_subspace(&block.z, &zero_region)?;
    let annulus = spectral_subspace(&block.z, &annulus_region)?;
    let angles = principal_cos(&zero, &annulus)?;
    let sigma = operator_norm(&y);
    let identity = sigma / (1.0 + sigma * sigma).sqrt();

    let mut warnings = zero.warnings.clone();
    warnings.extend(annulus.warnings.iter().cloned());
    if zero.dim != block.m || annulus.dim != n - block.m {
        warnings.push(format!(
            "subspace dimensions {} + {} do not match the block sizes {} + {}",
            zero.dim,
            annulus.dim,
            block.m,
            n - block.m
        ));
    }
    Ok(BlockMeasurement {
        dim_zero: zero.dim,
        dim_annulus: annulus.dim,
        cos_identity_error: (angles.cos_alpha - identity).abs(),
        cos_alpha: angles.cos_alpha,
        principal_cosines: angles.principal_cosines,
        sigma_max_y: sigma,
        tau_frob_y: tau_frob(&y_embedded),
        tau_frob_z2_inv: tau_frob(&invert_upper_triangular(&block.z2)?),
        residual_conjugation,
        sylvester_residual,
        series_vs_sylvester,
        similarity_identity_error,
        warnings,
    })
}

/// Uniform measure on the annulus `A(s′, s)`.
pub fn uniform_annulus(s_prime: f64, s: f64) -> Result<AtomicMeasure> {
    AtomicMeasure::new(
        vec![],
        vec![RadialComponent::annulus(0.0, s_prime, s, 1.0)?],
    )
}

/// Splits `μ = t·δ₀ + (1−t)·ν` and returns `(t, ν)`.
pub fn split_zero_atom(measure: &AtomicMeasure) -> Result<(f64, AtomicMeasure)> {
    let at_zero = |a: &Atom| a.location.0 == Complex64::new(0.0, 0.0);
    let t = measure
        .atoms()
        .iter()
        .filter(|a| at_zero(a))
        .map(|a| a.mass)
        .sum::<f64>();
    if !(t > 0.0) {
        return Err(Error::invalid("measure has no atom at 0"));
    }
    if measure.truncation().is_some() {
        return Err(Error::invalid(
            "the nonzero part must be listed in full (no truncated tail)",
        ));
    }
    let rest = 1.0 - t;
    if !(rest > 0.0) {
        return Err(Error::invalid("measure has no mass away from 0"));
    }
    let atoms = measure
        .atoms()
        .iter()
        .filter(|a| !at_zero(a))
        .map(|a| Atom::new(a.location, a.mass / rest))
        .collect();
    let continuous = measure
        .continuous()
        .iter()
        .map(|c| RadialComponent {
            mass: c.mass / rest,
            ..*c
        })
        .collect();
    Ok((t, AtomicMeasure::new(atoms, continuous)?))
}

#[derive(Debug, Clone)]
pub struct Lemma1Config {
    pub t: f64,
    pub s_prime: f64,
    pub s: f64,
    pub c: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub slack: Slack,
    pub policy: DiagonalPolicy,
    pub exec: ExecMode,
    /// Law of the annulus eigenvalues; uniform on `A(s′, s)` when `None`.
    pub annulus: Option<AtomicMeasure>,
}

impl Default for Lemma1Config {
    fn default() -> Self {
        Lemma1Config {
            t: 0.5,
            s_prime: 0.9,
            s: 1.0,
            c: 1.0,
            n: 256,
            trials: 50,
            seed: crate::DEFAULT_SEED,
            slack: Slack::default(),
            policy: DiagonalPolicy::Quantile,
            exec: ExecMode::default(),
            annulus: None,
        }
    }
}

/// One CSV row of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub trial: usize,
    pub orientation: Orientation,
    #[serde(rename = "N")]
    pub n: usize,
    pub t: f64,
    pub c: f64,
    pub s_prime: f64,
    pub s: f64,
    pub dim_zero: usize,
    pub dim_annulus: usize,
    pub cos_alpha: f64,
    pub bound_sharp: f64,
    pub bound_weak: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Trial {
    pub row: ExperimentRow,
    pub measurement: BlockMeasurement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Summary {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub t: f64,
    pub c: f64,
    pub s_prime: f64,
    pub s: f64,
    pub bound_sharp: f64,
    pub bound_weak: f64,
    pub slack: Slack,
    pub slack_note: String,
    pub mean_cos_alpha: f64,
    pub min_cos_alpha: f64,
    pub max_cos_alpha: f64,
    pub mean_cos_zero_first: f64,
    pub mean_cos_annulus_first: f64,
    pub satisfied_fraction: f64,
    /// `mean ≥ mean_factor · bound_sharp`.
    pub mean_above_bound: bool,
    /// `min ≥ bound_weak − min_additive`.
    pub min_above_bound: bool,
    #[serde(rename = "mean_tau_frob_Y")]
    pub mean_tau_frob_y: f64,
    /// `c²·t(1−t)/s²`.
    #[serde(rename = "tau_frob_Y_floor")]
    pub tau_frob_y_floor: f64,
    pub mean_tau_frob_z2_inv: f64,
    /// `s⁻²`.
    pub tau_frob_z2_inv_floor: f64,
    pub max_residual_conjugation: f64,
    pub max_sylvester_residual: f64,
    pub max_series_vs_sylvester: f64,
    pub max_cos_identity_error: f64,
    pub max_similarity_identity_error: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub summary: Lemma1Summary,
    pub trials: Vec<Lemma1Trial>,
}

impl Lemma1Report {
    pub fn rows(&self) -> Vec<ExperimentRow> {
        self.trials.iter().map(|t| t.row.clone()).collect()
    }

    pub fn trial_records(&self) -> Vec<TrialRecord> {
        self.trials
            .iter()
            .map(|t| TrialRecord {
                trial_index: t.row.trial,
                orientation: t.row.orientation,
                n: t.row.n,
                t: t.row.t,
                c: t.row.c,
                s_prime: t.row.s_prime,
                s: t.row.s,
                sigma_max_y: t.measurement.sigma_max_y,
                tau_frob_y: t.measurement.tau_frob_y,
                residual_conjugation: t.measurement.residual_conjugation,
            })
            .collect()
    }
}

fn check_annulus(s_prime: f64, s: f64) -> Result<()> {
    if s_prime > 0.0 && s_prime < s && s.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "need 0 < s' < s, got s' = {s_prime}, s = {s}"
        )))
    }
}

/// Runs `trials` draws in both orientations. Trial `k` in orientation `o`
/// uses the stream `trial_rng(seed, stream_offset + k, o)`.
fn run_block_trials(
    cfg: &Lemma1Config,
    annulus: &AtomicMeasure,
    stream_offset: u64,
) -> Result<Vec<Lemma1Trial>> {
    let sharp = lemma1_cos_lower(cfg.s, cfg.c, cfg.t)?;
    let weak = lemma1_cos_weak(cfg.s, cfg.c)?;
    let results = map_indexed(2 * cfg.trials, cfg.exec, |idx| -> Result<Lemma1Trial> {
        let (trial, orientation) = (idx / 2, Orientation::BOTH[idx % 2]);
        let mut rng = trial_rng(cfg.seed, stream_offset + trial as u64, orientation);
        let block = sample_block_model(
            cfg.t,
            annulus,
            cfg.c,
            cfg.n,
            orientation,
            cfg.policy,
            &mut rng,
        )?;
        let measurement = measure_block(&block, cfg.s_prime, cfg.s)?;
        let satisfied = measurement.cos_alpha >= sharp.cos_lower - cfg.slack.min_additive;
        Ok(Lemma1Trial {
            row: ExperimentRow {
                trial,
                orientation,
                n: cfg.n,
                t: cfg.t,
                c: cfg.c,
                s_prime: cfg.s_prime,
                s: cfg.s,
                dim_zero: measurement.dim_zero,
                dim_annulus: measurement.dim_annulus,
                cos_alpha: measurement.cos_alpha,
                bound_sharp: sharp.cos_lower,
                bound_weak: weak.cos_lower,
                satisfied,
            },
            measurement,
        })
    });
    results.into_iter().collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        f64::NAN
    } else {
        s / k as f64
    }
}

fn max_of(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, f64::max)
}

/// Samples block models with `t = μ({0})`, measures the angle between the
/// `{0}` subspace and the annulus subspace, and compares against the sharp
/// and weak bounds.
pub fn lemma1_experiment(cfg: &Lemma1Config) -> Result<Lemma1Report> {
    check_annulus(cfg.s_prime, cfg.s)?;
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let annulus = match &cfg.annulus {
        Some(a) => {
            let (lo, hi) = support_moduli(a);
            if lo < cfg.s_prime * (1.0 - 1e-12) || hi > cfg.s * (1.0 + 1e-12) {
                return Err(Error::invalid(format!(
                    "annulus law has moduli in [{lo}, {hi}], outside [{}, {}]",
                    cfg.s_prime, cfg.s
                )));
            }
            a.clone()
        }
        None => uniform_annulus(cfg.s_prime, cfg.s)?,
    };
    let trials = run_block_trials(cfg, &annulus, 0)?;
    Ok(Lemma1Report {
        summary: summarize_lemma1(cfg, &trials)?,
        trials,
    })
}

fn summarize_lemma1(cfg: &Lemma1Config, trials: &[Lemma1Trial]) -> Result<Lemma1Summary> {
    let sharp = lemma1_cos_lower(cfg.s, cfg.c, cfg.t)?.cos_lower;
    let weak = lemma1_cos_weak(cfg.s, cfg.c)?.cos_lower;
    let cos = || trials.iter().map(|t| t.row.cos_alpha);
    let by = |o: Orientation| {
        mean(
            trials
                .iter()
                .filter(|t| t.row.orientation == o)
                .map(|t| t.row.cos_alpha),
        )
    };
    let meas = || trials.iter().map(|t| &t.measurement);
    let mean_cos = mean(cos());
    let min_cos = cos().fold(f64::INFINITY, f64::min);
    let mut warnings: Vec<String> = meas().flat_map(|m| m.warnings.iter().cloned()).collect();
    warnings.sort();
    warnings.dedup();
    Ok(Lemma1Summary {
        seed: cfg.seed,
        n: cfg.n,
        trials: cfg.trials,
        t: cfg.t,
        c: cfg.c,
        s_prime: cfg.s_prime,
        s: cfg.s,
        bound_sharp: sharp,
        bound_weak: weak,
        slack: cfg.slack,
        slack_note: SLACK_NOTE.into(),
        mean_cos_alpha: mean_cos,
        min_cos_alpha: min_cos,
        max_cos_alpha: max_of(cos()),
        mean_cos_zero_first: by(Orientation::ZeroFirst),
        mean_cos_annulus_first: by(Orientation::AnnulusFirst),
        satisfied_fraction: trials.iter().filter(|t| t.row.satisfied).count() as f64
            / trials.len() as f64,
        mean_above_bound: mean_cos >= cfg.slack.mean_factor * sharp,
        min_above_bound: min_cos >= weak - cfg.slack.min_additive,
        mean_tau_frob_y: mean(meas().map(|m| m.tau_frob_y)),
        tau_frob_y_floor: cfg.c * cfg.c * cfg.t * (1.0 - cfg.t) / (cfg.s * cfg.s),
        mean_tau_frob_z2_inv: mean(meas().map(|m| m.tau_frob_z2_inv)),
        tau_frob_z2_inv_floor: 1.0 / (cfg.s * cfg.s),
        max_residual_conjugation: max_of(meas().map(|m| m.residual_conjugation)),
        max_sylvester_residual: max_of(meas().map(|m| m.sylvester_residual)),
        max_series_vs_sylvester: max_of(meas().map(|m| m.series_vs_sylvester)),
        max_cos_identity_error: max_of(meas().map(|m| m.cos_identity_error)),
        max_similarity_identity_error: max_of(meas().map(|m| m.similarity_identity_error)),
        warnings,
    })
}

pub fn write_experiment_csv<R: Serialize>(rows: &[R], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `½δ₀ + ½·Σ C₂ n⁻² δ_{1/n}` truncated at `n_max` atoms.
pub fn atom_at_accumulation_point(n_max: usize) -> Result<AtomicMeasure> {
    AtomicMeasure::mixture(&[
        (0.5, AtomicMeasure::dirac(0.0)),
        (0.5, example1(2.0, n_max)?),
    ])
}

/// `s_j = 2^{−j}` for `j = 1..=steps`.
pub fn dyadic_schedule(steps: usize) -> Vec<f64> {
    (1..=steps as i32).map(|j| 2f64.powi(-j)).collect()
}

#[derive(Debug, Clone)]
pub struct Theorem2Config {
    pub c: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Outer radii `sₙ`; the inner radius is `sₙ/2`.
    pub schedule: Vec<f64>,
    pub slack: Slack,
    pub policy: DiagonalPolicy,
    pub exec: ExecMode,
}

impl Default for Theorem2Config {
    fn default() -> Self {
        Theorem2Config {
            c: 1.0,
            n: 256,
            trials: 50,
            seed: crate::DEFAULT_SEED,
            schedule: dyadic_schedule(5),
            slack: Slack::default(),
            policy: DiagonalPolicy::Quantile,
            exec: ExecMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Row {
    pub step: usize,
    pub s_n: f64,
    pub s_n_prime: f64,
    pub mass_b: f64,
    pub trial: usize,
    pub orientation: Orientation,
    #[serde(rename = "N")]
    pub n: usize,
    pub t: f64,
    pub c_restricted: f64,
    pub dim_zero: usize,
    pub dim_annulus: usize,
    pub cos_alpha: f64,
    pub bound: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Step {
    pub step: usize,
    pub s_n: f64,
    pub s_n_prime: f64,
    /// `μ(Bₙ)` with `Bₙ = {0} ∪ A(sₙ′, sₙ)`.
    pub mass_b: f64,
    /// `μ({0})/μ(Bₙ)`.
    pub t: f64,
    /// `c·√μ(Bₙ)`.
    pub c_restricted: f64,
    /// `(1 + 2sₙ²/(c²μ(Bₙ)))^{−1/2}`.
    pub bound: f64,
    pub bound_sharp: f64,
    pub mean_cos_alpha: f64,
    pub min_cos_alpha: f64,
    pub mean_above_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Summary {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub c: f64,
    pub slack: Slack,
    pub slack_note: String,
    pub steps: Vec<Theorem2Step>,
    /// Step means never decrease along the schedule.
    pub nondecreasing: bool,
    pub all_above_bound: bool,
    pub notices: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub summary: Theorem2Summary,
    pub rows: Vec<Theorem2Row>,
}

/// For each radius, restricts μ to `{0} ∪ A(s/2, s)`, renormalizes, samples
/// the block model at scale `c√μ(Bₙ)` and measures the angle.
pub fn theorem2_experiment(
    measure: &AtomicMeasure,
    cfg: &Theorem2Config,
) -> Result<Theorem2Report> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if cfg.schedule.is_empty() {
        return Err(Error::invalid("schedule is empty"));
    }
    let zero = measure.mass_in(&RegionSpec::singleton(0.0))?;
    let mass_zero = zero.exact().ok_or(Error::UnresolvedTail {
        lo: zero.lo,
        hi: zero.hi,
    })?;
    if !(mass_zero > 0.0) {
        return Err(Error::invalid("measure has no atom at 0"));
    }
    let mut notices = Vec::new();
    let mut steps = Vec::new();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (step, &s) in cfg.schedule.iter().enumerate() {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!(
                "schedule radius {s} must be positive"
            )));
        }
        let s_prime = 0.5 * s;
        let ring = RegionSpec::closed_annulus(0.0, s_prime, s);
        let ring_mass = measure.mass_in(&ring)?;
        let Some(ring_mass) = ring_mass.exact() else {
            notices.push(format!(
                "s = {s}: ring mass only known to lie in [{}, {}]; skipped",
                ring_mass.lo, ring_mass.hi
            ));
            continue;
        };
        if ring_mass <= 0.0 {
            notices.push(format!(
                "s = {s}: A({s_prime}, {s}) captures no atoms; skipped"
            ));
            continue;
        }
        let mass_b = mass_zero + ring_mass;
        let t = mass_zero / mass_b;
        let c_restricted = cfg.c * mass_b.sqrt();
        let annulus = measure.renormalized_restriction(&ring)?;
        let lcfg = Lemma1Config {
            t,
            s_prime,
            s,
            c: c_restricted,
            n: cfg.n,
            trials: cfg.trials,
            seed: cfg.seed,
            slack: cfg.slack,
            policy: cfg.policy,
            exec: cfg.exec,
            annulus: Some(annulus.clone()),
        };
        let trials = match run_block_trials(&lcfg, &annulus, (step * cfg.trials) as u64) {
            Ok(t) => t,
            Err(Error::DegenerateBlock(msg)) => {
                notices.push(format!("s = {s}: {msg}; skipped"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let bound = lemma1_cos_weak(s, c_restricted)?;
        let bound_sharp = lemma1_cos_lower(s, c_restricted, t)?.cos_lower;
        let cos: Vec<f64> = trials.iter().map(|r| r.row.cos_alpha).collect();
        let mean_cos = mean(cos.iter().copied());
        warnings.extend(
            trials
                .iter()
                .flat_map(|r| r.measurement.warnings.iter().cloned()),
        );
        rows.extend(trials.iter().map(|r| Theorem2Row {
            step,
            s_n: s,
            s_n_prime: s_prime,
            mass_b,
            trial: r.row.trial,
            orientation: r.row.orientation,
            n: cfg.n,
            t,
            c_restricted,
            dim_zero: r.row.dim_zero,
            dim_annulus: r.row.dim_annulus,
            cos_alpha: r.row.cos_alpha,
            bound: bound.cos_lower,
            satisfied: r.row.cos_alpha >= bound.cos_lower - cfg.slack.min_additive,
        }));
        steps.push(Theorem2Step {
            step,
            s_n: s,
            s_n_prime: s_prime,
            mass_b,
            t,
            c_restricted,
            bound: bound.cos_lower,
            bound_sharp,
            mean_cos_alpha: mean_cos,
            min_cos_alpha: cos.iter().copied().fold(f64::INFINITY, f64::min),
            mean_above_bound: mean_cos >= cfg.slack.mean_factor * bound.cos_lower,
        });
    }
    if steps.is_empty() {
        return Err(Error::invalid("no schedule radius captured any mass"));
    }
    warnings.sort();
    warnings.dedup();
    let summary = Theorem2Summary {
        seed: cfg.seed,
        n: cfg.n,
        trials: cfg.trials,
        c: cfg.c,
        slack: cfg.slack,
        slack_note: SLACK_NOTE.into(),
        nondecreasing: steps
            .windows(2)
            .all(|w| w[1].mean_cos_alpha >= w[0].mean_cos_alpha),
        all_above_bound: steps.iter().all(|s| s.mean_above_bound),
        steps,
        notices,
        warnings,
    };
    Ok(Theorem2Report { summary, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(cols: &[Vec<Complex64>]) -> SubspaceBasis {
        let n = cols[0].len();
        SubspaceBasis {
            basis: ComplexMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]),
            region: RegionSpec::singleton(0.0),
            dim: cols.len(),
            warnings: vec![],
        }
    }

    fn e(n: usize, k: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0))
            .collect()
    }

    #[test]
    fn elementary_angles() {
        let u = basis(&[e(3, 0)]);
        assert_eq!(
            principal_cos(&u, &basis(&[e(3, 1)])).unwrap().cos_alpha,
            0.0
        );
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = basis(&[vec![
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(0.0, 0.0),
        ]]);
        assert!((principal_cos(&u, &v).unwrap().cos_alpha - h).abs() < 1e-15);
    }

    #[test]
    fn normal_matrix_gives_coordinate_spans() {
        let z = ComplexMatrix::diagonal(&[0.0, 0.0, 3.0].map(|x| Complex64::new(x, 0.0)));
        let sub = spectral_subspace(&z, &RegionSpec::closed_annulus(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(sub.dim, 2);
        assert_eq!(sub.basis, ComplexMatrix::identity(3).leading_columns(2));
        let out = spectral_subspace(&z, &RegionSpec::closed_annulus(0.0, 2.0, 4.0)).unwrap();
        assert_eq!(out.dim, 1);
        assert!((out.basis[(2, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_eigenvalue_is_warned_and_kept() {
        let z = ComplexMatrix::diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(5.0, 0.0)]);
        let sub =
            spectral_subspace(&z, &RegionSpec::closed_annulus(0.0, 0.0, 1.0 - 1e-11)).unwrap();
        assert_eq!(sub.dim, 1);
        assert_eq!(sub.warnings.len(), 1);
    }

    fn block(o: Orientation, n: usize, trial: u64) -> BlockModel {
        let mut rng = trial_rng(11, trial, o);
        sample_block_model(
            0.5,
            &uniform_annulus(0.9, 1.0).unwrap(),
            1.0,
            n,
            o,
            DiagonalPolicy::Quantile,
            &mut rng,
        )
        .unwrap()
    }

    #[test]
    fn zero_subspace_is_leading_coordinates() {
        let b = block(Orientation::ZeroFirst, 16, 0);
        let (zr, _) = split_regions(0.9, 1.0);
        let sub = spectral_subspace(&b.z, &zr).unwrap();
        assert_eq!(sub.dim, 8);
        assert_eq!(sub.basis, ComplexMatrix::identity(16).leading_columns(8));
    }

    #[test]
    fn annulus_subspace_contains_graph_of_y() {
        for o in Orientation::BOTH {
            let b = block(o, 20, 1);
            let y = compute_y_series(&b).unwrap();
            let (zr, ar) = split_regions(0.9, 1.0);
            let target = match o {
                Orientation::ZeroFirst => spectral_subspace(&b.z, &ar).unwrap(),
                Orientation::AnnulusFirst => spectral_subspace(&b.z, &zr).unwrap(),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let v = ComplexMatrix::from_fn(y.cols(), 3, |_, _| {
                Complex64::new(rng.random(), rng.random())
            });
            let graph = ComplexMatrix::vstack(&y.matmul(&v).unwrap(), &v).unwrap();
            let proj = target
                .basis
                .matmul(&target.basis.adjoint_matmul(&graph).unwrap())
                .unwrap();
            let res = proj.sub(&graph).unwrap().frobenius_norm() / graph.frobenius_norm();
            assert!(res < 1e-9, "{o:?}: {res:e}");
        }
    }

    #[test]
    fn measured_cosine_matches_y_identity() {
        for o in Orientation::BOTH {
            let m = measure_block(&block(o, 24, 2), 0.9, 1.0).unwrap();
            assert!(
                m.cos_identity_error < 1e-10,
                "{o:?}: {:e}",
                m.cos_identity_error
            );
            assert!(m.warnings.is_empty(), "{:?}", m.warnings);
            assert_eq!((m.dim_zero, m.dim_annulus), (12, 12));
        }
    }

    #[test]
    fn small_lemma1_run_is_deterministic() {
        let cfg = Lemma1Config {
            n: 24,
            trials: 3,
            ..Default::default()
        };
        let a = lemma1_experiment(&cfg).unwrap();
        let b = lemma1_experiment(&Lemma1Config {
            exec: ExecMode::Sequential,
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials.len(), 6);
        assert!(a.summary.max_residual_conjugation < 1e-10);
    }

    #[test]
    fn full_mass_schedule_reduces_to_lemma1() {
        let mu = AtomicMeasure::mixture(&[
            (0.5, AtomicMeasure::dirac(0.0)),
            (0.5, uniform_annulus(0.5, 1.0).unwrap()),
        ])
        .unwrap();
        let cfg = Theorem2Config {
            n: 16,
            trials: 2,
            schedule: vec![1.0],
            ..Default::default()
        };
        let t2 = theorem2_experiment(&mu, &cfg).unwrap();
        assert_eq!(t2.summary.steps[0].mass_b, 1.0);
        let l1 = lemma1_experiment(&Lemma1Config {
            s_prime: 0.5,
            n: 16,
            trials: 2,
            ..Default::default()
        })
        .unwrap();
        let a: Vec<f64> = t2.rows.iter().map(|r| r.cos_alpha).collect();
        let b: Vec<f64> = l1.trials.iter().map(|r| r.row.cos_alpha).collect();
        assert_eq!(a, b);
        assert_eq!(t2.summary.steps[0].bound, l1.summary.bound_weak);
    }

    #[test]
    fn empty_ring_is_skipped_with_notice() {
        let mu = AtomicMeasure::mixture(&[
            (0.5, AtomicMeasure::dirac(0.0)),
            (0.5, AtomicMeasure::dirac(0.75)),
        ])
        .unwrap();
        let cfg = Theorem2Config {
            n: 16,
            trials: 1,
            schedule: vec![1.0, 0.25],
            ..Default::default()
        };
        let r = theorem2_experiment(&mu, &cfg).unwrap();
        assert_eq!(r.summary.steps.len(), 1);
        assert_eq!(r.summary.notices.len(), 1);
    }

    #[test]
    fn zero_atom_split() {
        let mu = AtomicMeasure::mixture(&[
            (0.25, AtomicMeasure::dirac(0.0)),
            (0.75, uniform_annulus(0.9, 1.0).unwrap()),
        ])
        .unwrap();
        let (t, nu) = split_zero_atom(&mu).unwrap();
        assert_eq!(t, 0.25);
        assert!((nu.total_mass() - 1.0).abs() < 1e-15);
        assert!(split_zero_atom(&uniform_annulus(0.9, 1.0).unwrap()).is_err());
    }
}
