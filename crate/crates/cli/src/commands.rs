use std::fmt::Write as _;
use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use dtlab::bounds::{
    lemma1_cos_lower, lemma1_cos_lower_exact, lemma1_cos_weak, nza_chain_cos, parse_rational,
    unza_chain_cos, AngleBound,
};
use dtlab::hypothesis::{
    classify, example3_min_bound, example3_min_bound_fast, r_branch_limit, write_traces_csv,
    ClassifyOptions, DStrategy, Example3Analysis, HypothesisReport, Theorem2Status,
};
use dtlab::matmodel::{support_moduli, write_trial_records, DiagonalPolicy};
use dtlab::measure::{
    example1, example2, example3, parse_measure_spec, AtomicMeasure, FamilyTag, EXAMPLE3_MAX_ATOMS,
};
use dtlab::par::ExecMode;
use dtlab::subspaces::{
    atom_at_accumulation_point, dyadic_schedule, lemma1_experiment, split_zero_atom,
    theorem2_experiment, write_experiment_csv, Lemma1Config, Slack, Theorem2Config,
};
use serde::Serialize;

use crate::args::{
    AnalyzeArgs, BoundsArgs, Cli, Command, DChoice, ExampleArgs, Family, Format, Lemma1Args,
    MeasureArgs, Policy, SimCommon, Simulate, Theorem2Args,
};
use crate::output::Bundle;

/// Result of a successful command: files to write and text for stdout.
pub struct Outcome {
    pub bundle: Bundle,
    pub stdout: String,
    /// Informational lines for stderr that do not change the exit code.
    pub notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            bundle: Bundle::default(),
            stdout: String::new(),
            notes: Vec::new(),
        }
    }
}

pub fn run(cli: &Cli, seed: u64) -> Result<Outcome> {
    let exec = match cli.exec {
        crate::args::Exec::Sequential => ExecMode::Sequential,
        crate::args::Exec::Parallel => ExecMode::Parallel,
    };
    match &cli.command {
        Command::Analyze(a) => analyze(a, exec, cli.format),
        Command::Bounds(b) => bounds(b, cli.format),
        Command::Simulate(Simulate::Lemma1(a)) => simulate_lemma1(a, seed, exec, cli.format),
        Command::Simulate(Simulate::Theorem2(a)) => simulate_theorem2(a, seed, exec, cli.format),
        Command::Example(a) => example(a, exec, cli.format),
    }
}

fn label(v: &impl Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(serde_json::Value::Object(o)) if o.get("name").is_some_and(|n| n.is_string()) => {
            o["name"].as_str().unwrap_or_default().to_string()
        }
        Ok(other) => other.to_string(),
        Err(_) => "?".into(),
    }
}

fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_experiment_csv(rows, &mut buf)?;
    Ok(buf)
}

fn read_spec(spec: &str) -> Result<AtomicMeasure> {
    let (name, text) = if spec.trim_start().starts_with('{') {
        ("inline measure spec".to_string(), spec.to_string())
    } else {
        let text =
            fs::read_to_string(spec).with_context(|| format!("cannot read measure spec {spec}"))?;
        (format!("measure spec {spec}"), text)
    };
    parse_measure_spec(&text).with_context(|| name)
}

fn family_measure(
    family: Family,
    p: Option<f64>,
    n_max: usize,
    notes: &mut Vec<String>,
) -> Result<AtomicMeasure> {
    if n_max < 2 {
        bail!("--n-max must be at least 2, got {n_max}");
    }
    Ok(match family {
        Family::Example1 => {
            let p = p.ok_or_else(|| anyhow!("example 1 needs --p"))?;
            if !(p > 1.0 && p.is_finite()) {
                bail!("--p must be a finite number above 1, got {p}");
            }
            example1(p, n_max)?
        }
        Family::Example2 => example2(n_max)?,
        Family::Example3 => {
            if n_max > EXAMPLE3_MAX_ATOMS {
                notes.push(format!(
                    "example 3 lists at most {EXAMPLE3_MAX_ATOMS} atoms; the measure is truncated there"
                ));
            }
            example3(n_max.min(EXAMPLE3_MAX_ATOMS))?
        }
    })
}

fn load_measure(src: &MeasureArgs, notes: &mut Vec<String>) -> Result<AtomicMeasure> {
    match (src.family, &src.measure) {
        (Some(f), None) => family_measure(f, src.p, src.n_max, notes),
        (None, Some(m)) => read_spec(m),
        (None, None) => bail!("give --family or --measure"),
        (Some(_), Some(_)) => bail!("--family and --measure are exclusive"),
    }
}

fn strategy(choice: DChoice, values: &[f64], flag: &str) -> Result<DStrategy> {
    Ok(match choice {
        DChoice::MinGap => DStrategy::MinGap,
        DChoice::TailRadius => DStrategy::TailRadius,
        DChoice::Custom => {
            if values.is_empty() {
                bail!("{flag} custom needs --d-values");
            }
            DStrategy::Custom(values.to_vec())
        }
    })
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        bail!("--c must be positive and finite, got {c}");
    }
    Ok(())
}

fn classify_into(
    mu: &AtomicMeasure,
    c: f64,
    opts: &ClassifyOptions,
    format: Format,
    out: &mut Outcome,
) -> Result<HypothesisReport> {
    let report = classify(mu, c, opts)?;
    let mut nza = Vec::new();
    write_traces_csv(&report.nza_traces, &mut nza)?;
    let mut unza = Vec::new();
    write_traces_csv(&report.unza_traces, &mut unza)?;
    out.bundle.add_json("report.json", &report)?;
    if format == Format::Csv {
        out.stdout.push_str(&String::from_utf8_lossy(&nza));
    } else {
        out.stdout.push_str(&report_text(&report));
    }
    out.bundle.add("traces.csv", nza);
    out.bundle.add("unza_traces.csv", unza);
    out.bundle.warnings.extend(report.warnings.iter().cloned());
    Ok(report)
}

fn report_text(r: &HypothesisReport) -> String {
    let mut s = String::new();
    let family = match r.family {
        FamilyTag::Example1 { p } => format!("example1 (p = {p})"),
        other => label(&other),
    };
    let _ = writeln!(
        s,
        "family: {family}  c = {}  atoms {}..{}",
        r.c, r.n_range.0, r.n_range.1
    );
    match &r.theorem2_applies {
        Theorem2Status::Yes { atom, index, .. } => {
            let _ = writeln!(
                s,
                "atom at an accumulation point: yes (atom {index} at {})",
                atom.0
            );
        }
        Theorem2Status::No { reason } => {
            let _ = writeln!(s, "atom at an accumulation point: no ({reason})");
        }
    }
    for (name, c) in [("NZA", &r.nza), ("UNZA", &r.unza)] {
        let _ = writeln!(
            s,
            "{name:<5} d = {:<12} inf ~ {:.6e}  trend {}",
            c.strategy,
            c.inf_estimate,
            label(&c.trend)
        );
    }
    let _ = writeln!(s, "verdict: {}", r.verdict.as_str());
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn analyze(a: &AnalyzeArgs, exec: ExecMode, format: Format) -> Result<Outcome> {
    check_c(a.c)?;
    let mut out = Outcome::new();
    let mu = load_measure(&a.source, &mut out.notes)?;
    let n_range = match (a.n_from, a.n_to) {
        (None, None) => None,
        (from, to) => Some((from.unwrap_or(1), to.unwrap_or(mu.atoms().len()))),
    };
    if let Some((from, to)) = n_range {
        if from < 1 || from > to {
            bail!("atom range {from}..{to} is empty");
        }
    }
    let opts = ClassifyOptions {
        nza_strategy: strategy(a.nza_d, &a.d_values, "--nza-d")?,
        unza_strategy: strategy(a.unza_d, &a.d_values, "--unza-d")?,
        n_range,
        exec,
        ..Default::default()
    };
    classify_into(&mu, a.c, &opts, format, &mut out)?;
    Ok(out)
}

#[derive(Serialize)]
struct BoundRow {
    bound: String,
    cos_lower: f64,
    angle_upper: f64,
    s: Option<f64>,
    c: f64,
    t: Option<f64>,
    d: Option<f64>,
    m: Option<f64>,
    exact_cos_squared: Option<String>,
    exact_cos: Option<String>,
}

/// A decimal or a `p/q` fraction.
fn number(text: &str, flag: &str) -> Result<f64> {
    let bad = || anyhow!("--{flag}: cannot read {text:?} as a number");
    let v = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            p / q
        }
        None => text.trim().parse().map_err(|_| bad())?,
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

fn bounds(a: &BoundsArgs, format: Format) -> Result<Outcome> {
    let c = number(&a.c, "c")?;
    let s = a.s.as_deref().map(|v| number(v, "s")).transpose()?;
    let t = a.t.as_deref().map(|v| number(v, "t")).transpose()?;
    let row = |b: AngleBound, s, t, d, m| BoundRow {
        bound: label(&b.provenance),
        cos_lower: b.cos_lower,
        angle_upper: b.angle_upper,
        s,
        c,
        t,
        d,
        m,
        exact_cos_squared: None,
        exact_cos: None,
    };
    let mut rows = Vec::new();
    if let Some(s) = s {
        if let Some(t) = t {
            let mut r = row(lemma1_cos_lower(s, c, t)?, Some(s), Some(t), None, None);
            if a.exact {
                let q =
                    |v: &str, flag: &str| parse_rational(v).map_err(|e| anyhow!("--{flag}: {e}"));
                let e = lemma1_cos_lower_exact(
                    &q(a.s.as_deref().unwrap_or_default(), "s")?,
                    &q(&a.c, "c")?,
                    &q(a.t.as_deref().unwrap_or_default(), "t")?,
                )?;
                r.exact_cos_squared = Some(e.squared.to_string());
                r.exact_cos = e.root.map(|v| v.to_string());
            }
            rows.push(r);
        }
        rows.push(row(lemma1_cos_weak(s, c)?, Some(s), None, None, None));
    }
    if let (Some(d), Some(t)) = (a.d, t) {
        if let Some(m) = a.m {
            rows.push(row(
                unza_chain_cos(d, c, m, t)?,
                None,
                Some(t),
                Some(d),
                Some(m),
            ));
        }
        rows.push(row(nza_chain_cos(d, c, t)?, None, Some(t), Some(d), None));
    }
    if rows.is_empty() {
        bail!("nothing to evaluate: give --s (and --t for the sharp bound), or --d with --t (and --m for the UNZA chain)");
    }
    let mut out = Outcome::new();
    let csv = csv_bytes(&rows)?;
    if format == Format::Csv {
        out.stdout.push_str(&String::from_utf8_lossy(&csv));
    } else {
        let _ = writeln!(
            out.stdout,
            "{:<14} {:>10} {:>12}",
            "bound", "cos_lower", "angle_upper"
        );
        for r in &rows {
            let _ = writeln!(
                out.stdout,
                "{:<14} {:>10.6} {:>12.6}",
                r.bound, r.cos_lower, r.angle_upper
            );
            if let Some(q) = &r.exact_cos_squared {
                let root = r.exact_cos.as_deref().unwrap_or("irrational");
                let _ = writeln!(out.stdout, "{:<14} cos^2 = {q}, cos = {root}", "");
            }
        }
    }
    out.bundle.add("bounds.csv", csv);
    Ok(out)
}

fn slack(c: &SimCommon) -> Result<Slack> {
    if !(c.mean_factor > 0.0 && c.mean_factor <= 1.0) {
        bail!("--mean-factor must lie in (0, 1], got {}", c.mean_factor);
    }
    if !(c.min_additive >= 0.0 && c.min_additive.is_finite()) {
        bail!("--min-additive must be nonnegative, got {}", c.min_additive);
    }
    Ok(Slack {
        mean_factor: c.mean_factor,
        min_additive: c.min_additive,
    })
}

fn policy(p: Policy) -> DiagonalPolicy {
    match p {
        Policy::Quantile => DiagonalPolicy::Quantile,
        Policy::Iid => DiagonalPolicy::Iid,
    }
}

fn check_sim(c: &SimCommon) -> Result<()> {
    check_c(c.c)?;
    if c.n < 2 {
        bail!("--N must be at least 2, got {}", c.n);
    }
    if c.trials == 0 {
        bail!("--trials must be at least 1");
    }
    Ok(())
}

fn simulate_lemma1(a: &Lemma1Args, seed: u64, exec: ExecMode, format: Format) -> Result<Outcome> {
    check_sim(&a.common)?;
    let mut cfg = Lemma1Config {
        t: a.t,
        s_prime: a.s_prime,
        s: a.s,
        c: a.common.c,
        n: a.common.n,
        trials: a.common.trials,
        seed,
        slack: slack(&a.common)?,
        policy: policy(a.common.policy),
        exec,
        annulus: None,
    };
    let mut out = Outcome::new();
    if let Some(spec) = &a.common.measure {
        let (t, nu) = split_zero_atom(&read_spec(spec)?)?;
        let (lo, hi) = support_moduli(&nu);
        cfg.t = t;
        cfg.s_prime = lo;
        cfg.s = hi;
        cfg.annulus = Some(nu);
        out.notes
            .push(format!("from the measure: t = {t}, s' = {lo}, s = {hi}"));
    }
    let report = lemma1_experiment(&cfg)?;
    let sum = &report.summary;
    let rows = csv_bytes(&report.rows())?;
    let mut records = Vec::new();
    write_trial_records(&report.trial_records(), &mut records)?;
    out.bundle.add_json("summary.json", sum)?;
    out.bundle.add("trials.csv", records);
    out.bundle.warnings.extend(sum.warnings.iter().cloned());
    if !sum.mean_above_bound {
        out.bundle.warnings.push(format!(
            "mean cos_alpha {:.6} is below {} x bound {:.6}",
            sum.mean_cos_alpha, sum.slack.mean_factor, sum.bound_sharp
        ));
    }
    if !sum.min_above_bound {
        out.bundle.warnings.push(format!(
            "min cos_alpha {:.6} is below bound {:.6} - {}",
            sum.min_cos_alpha, sum.bound_weak, sum.slack.min_additive
        ));
    }
    if format == Format::Csv {
        out.stdout.push_str(&String::from_utf8_lossy(&rows));
    } else {
        let s = &mut out.stdout;
        let _ = writeln!(
            s,
            "N = {}  trials = {} per orientation  t = {}  s' = {}  s = {}  c = {}  seed = {}",
            sum.n, sum.trials, sum.t, sum.s_prime, sum.s, sum.c, sum.seed
        );
        let _ = writeln!(
            s,
            "bound: sharp {:.6}  weak {:.6}",
            sum.bound_sharp, sum.bound_weak
        );
        let _ = writeln!(
            s,
            "cos_alpha: mean {:.6}  min {:.6}  max {:.6}",
            sum.mean_cos_alpha, sum.min_cos_alpha, sum.max_cos_alpha
        );
        let _ = writeln!(s, "satisfied fraction: {:.4}", sum.satisfied_fraction);
        let _ = writeln!(
            s,
            "tau_frob(Y): mean {:.6} (floor {:.6})  tau_frob(Z2^-1): mean {:.6} (floor {:.6})",
            sum.mean_tau_frob_y,
            sum.tau_frob_y_floor,
            sum.mean_tau_frob_z2_inv,
            sum.tau_frob_z2_inv_floor
        );
    }
    out.bundle.add("experiment.csv", rows);
    Ok(out)
}

fn simulate_theorem2(
    a: &Theorem2Args,
    seed: u64,
    exec: ExecMode,
    format: Format,
) -> Result<Outcome> {
    check_sim(&a.common)?;
    let schedule = if a.schedule.is_empty() {
        if a.steps == 0 {
            bail!("--steps must be at least 1");
        }
        dyadic_schedule(a.steps)
    } else {
        a.schedule.clone()
    };
    if let Some(r) = schedule.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        bail!("schedule radii must be positive, got {r}");
    }
    let mu = match &a.common.measure {
        Some(spec) => read_spec(spec)?,
        None => {
            if a.n_max < 2 {
                bail!("--n-max must be at least 2, got {}", a.n_max);
            }
            atom_at_accumulation_point(a.n_max)?
        }
    };
    let cfg = Theorem2Config {
        c: a.common.c,
        n: a.common.n,
        trials: a.common.trials,
        seed,
        schedule,
        slack: slack(&a.common)?,
        policy: policy(a.common.policy),
        exec,
    };
    let report = theorem2_experiment(&mu, &cfg)?;
    let sum = &report.summary;
    let mut out = Outcome::new();
    let rows = csv_bytes(&report.rows)?;
    out.bundle.add_json("summary.json", sum)?;
    out.bundle.warnings.extend(sum.warnings.iter().cloned());
    out.notes.extend(sum.notices.iter().cloned());
    if format == Format::Csv {
        out.stdout.push_str(&String::from_utf8_lossy(&rows));
    } else {
        let s = &mut out.stdout;
        let _ = writeln!(
            s,
            "N = {}  trials = {} per orientation  c = {}  seed = {}",
            sum.n, sum.trials, sum.c, sum.seed
        );
        let _ = writeln!(
            s,
            "{:>4} {:>10} {:>10} {:>8} {:>10} {:>10} {:>10}",
            "step", "s_n", "mass_B", "t", "bound", "mean_cos", "min_cos"
        );
        for st in &sum.steps {
            let _ = writeln!(
                s,
                "{:>4} {:>10.6} {:>10.6} {:>8.4} {:>10.6} {:>10.6} {:>10.6}",
                st.step, st.s_n, st.mass_b, st.t, st.bound, st.mean_cos_alpha, st.min_cos_alpha
            );
        }
        let _ = writeln!(
            s,
            "nondecreasing: {}  all above bound: {}",
            sum.nondecreasing, sum.all_above_bound
        );
    }
    out.bundle.add("experiment.csv", rows);
    Ok(out)
}

#[derive(Serialize)]
struct FnRow {
    n: usize,
    k_star: usize,
    min_bound: f64,
    ln_min_bound: f64,
    r_n: Option<f64>,
    s_n: Option<f64>,
    at_one: f64,
    at_r: Option<f64>,
    at_s: Option<f64>,
    at_n_minus_one: f64,
}

impl From<&Example3Analysis> for FnRow {
    fn from(a: &Example3Analysis) -> Self {
        FnRow {
            n: a.n,
            k_star: a.k_star,
            min_bound: a.min_bound,
            ln_min_bound: a.ln_min_bound,
            r_n: a.r_n,
            s_n: a.s_n,
            at_one: a.at_one.value,
            at_r: a.at_r.map(|v| v.value),
            at_s: a.at_s.map(|v| v.value),
            at_n_minus_one: a.at_n_minus_one.value,
        }
    }
}

#[derive(Serialize)]
struct Example3Limits {
    n: usize,
    r_n: Option<f64>,
    r_limit: f64,
    r_error: Option<f64>,
    branch_value: Option<f64>,
    branch_limit: f64,
    branch_error: Option<f64>,
    floor: f64,
    lowest_min_bound: f64,
    lowest_at_n: usize,
    lowest_at_k: usize,
    floor_holds: bool,
    scanned_up_to: usize,
    max_scan_rel_diff: f64,
}

const EXAMPLE3_FLOOR: f64 = 0.03;
const SCAN_LIMIT: usize = 500;

fn example3_table(n_max: usize, format: Format, out: &mut Outcome) -> Result<()> {
    let table: Vec<Example3Analysis> = (2..=n_max).map(example3_min_bound_fast).collect();
    let last = table.last().expect("n_max >= 2");
    let lowest = table
        .iter()
        .min_by(|a, b| a.min_bound.total_cmp(&b.min_bound))
        .expect("nonempty");
    let scanned = n_max.min(SCAN_LIMIT);
    let max_scan_rel_diff = table[..scanned - 1]
        .iter()
        .map(|a| {
            let full = example3_min_bound(a.n).min_bound;
            ((a.min_bound - full) / full).abs()
        })
        .fold(0.0, f64::max);
    let r_limit = 2.0 / std::f64::consts::LN_2;
    let branch = last.at_r.map(|v| v.value);
    let limits = Example3Limits {
        n: n_max,
        r_n: last.r_n,
        r_limit,
        r_error: last.r_n.map(|r| (r - r_limit).abs()),
        branch_value: branch,
        branch_limit: r_branch_limit(),
        branch_error: branch.map(|b| (b - r_branch_limit()).abs()),
        floor: EXAMPLE3_FLOOR,
        lowest_min_bound: lowest.min_bound,
        lowest_at_n: lowest.n,
        lowest_at_k: lowest.k_star,
        floor_holds: lowest.min_bound >= EXAMPLE3_FLOOR,
        scanned_up_to: scanned,
        max_scan_rel_diff,
    };
    if !limits.floor_holds {
        out.bundle.warnings.push(format!(
            "example 3: min over k is {:.6} at n = {}, k = {}, below the floor {EXAMPLE3_FLOOR}",
            lowest.min_bound, lowest.n, lowest.k_star
        ));
    }
    let rows: Vec<FnRow> = table.iter().map(FnRow::from).collect();
    out.bundle.add("example3_fn.csv", csv_bytes(&rows)?);
    out.bundle.add_json("example3_limits.json", &limits)?;
    if format == Format::Csv {
        return Ok(());
    }
    let s = &mut out.stdout;
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
    let _ = writeln!(s, "f_n table for n = 2..={n_max}");
    let _ = writeln!(
        s,
        "r_n at n = {n_max}: {} (limit {r_limit:.6})",
        show(last.r_n)
    );
    let _ = writeln!(
        s,
        "r_n branch value at n = {n_max}: {} (limit {:.6})",
        show(branch),
        r_branch_limit()
    );
    let _ = writeln!(
        s,
        "lowest min over k: {:.6} at n = {}, k = {}",
        lowest.min_bound, lowest.n, lowest.k_star
    );
    Ok(())
}

fn example(a: &ExampleArgs, exec: ExecMode, format: Format) -> Result<Outcome> {
    check_c(a.c)?;
    let mut out = Outcome::new();
    let family = match a.which {
        1 => Family::Example1,
        2 => Family::Example2,
        3 => Family::Example3,
        w => bail!("no example {w}"),
    };
    let mu = family_measure(family, a.p, a.n_max, &mut out.notes)?;
    let opts = ClassifyOptions {
        exec,
        ..Default::default()
    };
    classify_into(&mu, a.c, &opts, format, &mut out)?;
    if family == Family::Example3 {
        example3_table(a.n_max, format, &mut out)?;
    }
    Ok(out)
}
