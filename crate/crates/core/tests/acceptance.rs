//! Acceptance criteria 1 to 11. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use dtlab::bounds::{lemma1_cos_lower, lemma1_cos_lower_exact, lemma1_cos_weak, parse_rational};
use dtlab::hypothesis::{
    classify, critical_points, example3_min_bound, example3_min_bound_fast, r_branch_limit,
    select_nza_subsequence, unza_sequence, Candidate, ClassifyOptions, Criterion, DStrategy, Trend,
    Verdict,
};
use dtlab::matmodel::{sample_block_model, trial_rng, DiagonalPolicy, Orientation};
use dtlab::measure::{example1, example2, example3, ComplexPoint};
use dtlab::par::ExecMode;
use dtlab::subspaces::{
    atom_at_accumulation_point, lemma1_experiment, measure_block, theorem2_experiment,
    uniform_annulus, write_experiment_csv, BlockMeasurement, Lemma1Config, Lemma1Report,
    Theorem2Config,
};
use num_rational::BigRational;

struct Check {
    what: String,
    ok: bool,
}

fn check(what: impl Into<String>, ok: bool) -> Check {
    Check {
        what: what.into(),
        ok,
    }
}

struct Context {
    instances: Vec<BlockMeasurement>,
    lemma1: Lemma1Report,
}

/// The 100 block models of criteria 2 to 4: N cycles through 16, 64, 256,
/// t through 0.2, 0.5, 0.8, and the orientation alternates every nine draws.
fn oracle_instances() -> Vec<BlockMeasurement> {
    let annulus = uniform_annulus(0.9, 1.0).unwrap();
    (0..100)
        .map(|i| {
            let n = [16, 64, 256][i % 3];
            let t = [0.2, 0.5, 0.8][(i / 3) % 3];
            let o = Orientation::BOTH[(i / 9) % 2];
            let mut rng = trial_rng(dtlab::DEFAULT_SEED, i as u64, o);
            let block =
                sample_block_model(t, &annulus, 1.0, n, o, DiagonalPolicy::Quantile, &mut rng)
                    .unwrap();
            measure_block(&block, 0.9, 1.0).unwrap()
        })
        .collect()
}

fn max_by(xs: &[BlockMeasurement], f: impl Fn(&BlockMeasurement) -> f64) -> f64 {
    xs.iter().map(f).fold(0.0, f64::max)
}

fn criterion1(_: &Context) -> Vec<Check> {
    let q = |s: &str| parse_rational(s).unwrap();
    let exact = lemma1_cos_lower_exact(&q("2"), &q("1"), &q("0.9")).unwrap();
    let float = lemma1_cos_lower(2.0, 1.0, 0.9).unwrap().cos_lower;
    let weak = lemma1_cos_weak(2.0, 1.0).unwrap().cos_lower;
    let sharp_half = lemma1_cos_lower(1.0, 1.0, 0.5).unwrap().cos_lower;
    let weak_half = lemma1_cos_weak(1.0, 1.0).unwrap().cos_lower;
    vec![
        check(
            format!(
                "exact sharp bound {:?}",
                exact.root.as_ref().map(|r| r.to_string())
            ),
            exact.root == Some(BigRational::new(3.into(), 7.into())),
        ),
        check(
            format!("float sharp bound {float:.12}"),
            (float - 0.428_571).abs() <= 1e-6 && (float - 3.0 / 7.0).abs() <= 1e-9,
        ),
        check(
            format!("weak bound {weak:.16}"),
            (weak - 1.0 / 3.0).abs() <= 1e-15,
        ),
        check(
            format!("t=1/2 coincidence {:.1e}", (sharp_half - weak_half).abs()),
            (sharp_half - weak_half).abs() <= 1e-15,
        ),
    ]
}

fn criterion2(ctx: &Context) -> Vec<Check> {
    let diff = max_by(&ctx.instances, |m| m.series_vs_sylvester);
    let res = max_by(&ctx.instances, |m| m.sylvester_residual);
    vec![
        check(format!("max series vs Sylvester {diff:.2e}"), diff <= 1e-9),
        check(format!("max Sylvester residual {res:.2e}"), res <= 1e-10),
    ]
}

fn criterion3(ctx: &Context) -> Vec<Check> {
    let conj = max_by(&ctx.instances, |m| m.residual_conjugation);
    let id = max_by(&ctx.instances, |m| m.similarity_identity_error);
    vec![
        check(
            format!("max conjugation residual {conj:.2e}"),
            conj <= 1e-10,
        ),
        check(format!("max |(I+Y)(I-Y) - I| {id:.2e}"), id <= 1e-13),
    ]
}

fn criterion4(ctx: &Context) -> Vec<Check> {
    let err = max_by(&ctx.instances, |m| m.cos_identity_error);
    vec![check(
        format!("max |cos - sigma/sqrt(1+sigma^2)| {err:.2e}"),
        err <= 1e-10,
    )]
}

fn criterion5(ctx: &Context) -> Vec<Check> {
    let s = &ctx.lemma1.summary;
    let bound = 3f64.sqrt().recip();
    vec![
        check(
            format!("mean cos {:.4} vs {:.4}", s.mean_cos_alpha, 0.9 * bound),
            s.mean_cos_alpha >= 0.9 * bound,
        ),
        check(
            format!("min cos {:.4} vs {:.4}", s.min_cos_alpha, bound - 0.1),
            s.min_cos_alpha >= bound - 0.1,
        ),
        check(
            format!("satisfied fraction {:.3}", s.satisfied_fraction),
            s.satisfied_fraction >= 0.9,
        ),
        check(
            format!("{} rows", ctx.lemma1.trials.len()),
            ctx.lemma1.trials.len() == 100,
        ),
    ]
}

fn criterion6(ctx: &Context) -> Vec<Check> {
    let s = &ctx.lemma1.summary;
    vec![
        check(
            format!(
                "mean tau_frob(Y) {:.4} vs {:.4}",
                s.mean_tau_frob_y,
                0.9 * s.tau_frob_y_floor
            ),
            s.mean_tau_frob_y >= 0.9 * s.tau_frob_y_floor,
        ),
        check(
            format!(
                "mean tau_frob(Z2^-1) {:.4} vs {:.4}",
                s.mean_tau_frob_z2_inv,
                0.9 * s.tau_frob_z2_inv_floor
            ),
            s.mean_tau_frob_z2_inv >= 0.9 * s.tau_frob_z2_inv_floor,
        ),
    ]
}

fn criterion7(_: &Context) -> Vec<Check> {
    let pi2 = std::f64::consts::PI.powi(2);
    let m = example1(2.0, 1000).unwrap();
    let tr = dtlab::hypothesis::criterion_trace(&m, 1.0, &DStrategy::MinGap, 10, Criterion::Nza)
        .unwrap();
    let mut out = vec![
        check(
            format!("ratio at n=10 {:.12}", tr.ratio_nza),
            (tr.ratio_nza - pi2 / 726.0).abs() <= 1e-10,
        ),
        check("ratio at n=10 below pi^2/600", tr.ratio_nza <= pi2 / 600.0),
    ];
    let opts = ClassifyOptions::default();
    for (p, want) in [
        (1.5, Verdict::FailsNza),
        (2.0, Verdict::FailsNza),
        (3.9, Verdict::FailsNza),
        (4.1, Verdict::Inconclusive),
    ] {
        let r = classify(&example1(p, 1000).unwrap(), 1.0, &opts).unwrap();
        out.push(check(
            format!("p={p} {}", r.verdict.as_str()),
            r.verdict == want,
        ));
    }
    out
}

fn criterion8(_: &Context) -> Vec<Check> {
    let m = example2(1000).unwrap();
    let c = 6.0 / std::f64::consts::PI.powi(2);
    let rows = unza_sequence(
        &m,
        1.0,
        &DStrategy::TailRadius,
        1..=1000,
        ExecMode::default(),
    )
    .unwrap();
    let worst = rows
        .iter()
        .map(|r| {
            let n = r.n as f64;
            r.ratio_unza / ((1.0 + n.ln()).powi(2) / (c * n))
        })
        .fold(0.0, f64::max);
    let r = classify(&m, 1.0, &ClassifyOptions::default()).unwrap();
    vec![
        check(
            format!("max ratio / (1+ln n)^2/(Cn) = {worst:.4}"),
            worst <= 1.0,
        ),
        check(
            format!("UNZA trend {:?}", r.unza_trend),
            r.unza_trend == Trend::TendsToZero,
        ),
        check(
            format!("verdict {}", r.verdict.as_str()),
            r.verdict == Verdict::FailsUnza,
        ),
        check(
            "gap discrepancy warning",
            r.warnings.iter().any(|w| w.starts_with("gap discrepancy")),
        ),
    ]
}

fn criterion9(_: &Context) -> Vec<Check> {
    let r = classify(&example3(1000).unwrap(), 1.0, &ClassifyOptions::default()).unwrap();
    let a = example3_min_bound(10_000);
    let r_n = critical_points(10_000).unwrap().0;
    let at_r = a.at_r.unwrap().value;
    let (worst_n, worst) = (2..=10_000)
        .map(|n| (n, example3_min_bound_fast(n).min_bound))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    let scan_gap = (2..=500)
        .map(|n| {
            let (f, s) = (
                example3_min_bound_fast(n).min_bound,
                example3_min_bound(n).min_bound,
            );
            ((f - s) / s).abs()
        })
        .fold(0.0, f64::max);
    vec![
        check(
            format!("verdict {}", r.verdict.as_str()),
            r.verdict == Verdict::Inconclusive,
        ),
        check(
            format!("r_n {r_n:.6} vs 2/ln2"),
            (r_n - 2.885_390).abs() <= 1e-3,
        ),
        check(
            format!("r_n branch {at_r:.6} vs {:.6}", r_branch_limit()),
            (at_r - 0.443_766).abs() <= 1e-3,
        ),
        check(
            format!("discrete min {worst:.5} at n={worst_n} vs floor 0.03"),
            worst >= 0.03,
        ),
        check(format!("fast vs scan {scan_gap:.1e}"), scan_gap <= 1e-12),
    ]
}

fn criterion10(_: &Context) -> Vec<Check> {
    let m = example1(2.0, 1000).unwrap();
    let cands: Vec<Candidate> = (1..=m.atoms().len())
        .map(|n| Candidate {
            n,
            location: m.atoms()[n - 1].location,
            d: m.nearest_support_gap(n).unwrap(),
        })
        .collect();
    let sel = match select_nza_subsequence(&cands, ComplexPoint::real(0.0)) {
        Ok(s) => s,
        Err(e) => return vec![check(format!("selection failed: {e}"), false)],
    };
    let k = sel.indices.len().min(50);
    let b: Vec<f64> = sel.set_a[..k].iter().map(|a| a.0.norm()).collect();
    let mut pairwise = true;
    for i in 0..k {
        for j in i + 1..k {
            let dist = sel.set_a[i].dist(sel.set_a[j]);
            pairwise &= dist >= b[i] - b[j] && b[i] - b[j] > sel.d[i] && sel.d[i] > sel.d[j];
        }
    }
    let mut disjoint = true;
    for ball in &sel.set_b {
        for a in &sel.set_a {
            let r = a.dist(ball.center);
            disjoint &= !(r > 0.0 && r < ball.radius);
        }
    }
    vec![
        check(
            format!("{} selections", sel.indices.len()),
            sel.indices.len() >= 50,
        ),
        check("separation for the first 50", pairwise),
        check("A and B disjoint", disjoint),
    ]
}

fn criterion11(_: &Context) -> Vec<Check> {
    let csv = |exec: ExecMode| {
        let cfg = Lemma1Config {
            n: 48,
            trials: 4,
            seed: 7,
            exec,
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_experiment_csv(&lemma1_experiment(&cfg).unwrap().rows(), &mut buf).unwrap();
        buf
    };
    let t2 = || {
        let cfg = Theorem2Config {
            n: 48,
            trials: 2,
            seed: 7,
            schedule: vec![0.5, 0.25, 0.125],
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_experiment_csv(
            &theorem2_experiment(&atom_at_accumulation_point(1000).unwrap(), &cfg)
                .unwrap()
                .rows,
            &mut buf,
        )
        .unwrap();
        buf
    };
    let a = csv(ExecMode::Parallel);
    vec![
        check("lemma1 rerun identical", a == csv(ExecMode::Parallel)),
        check(
            "lemma1 sequential identical",
            a == csv(ExecMode::Sequential),
        ),
        check("theorem2 rerun identical", t2() == t2()),
    ]
}

fn main() -> ExitCode {
    let start = Instant::now();
    let instances = oracle_instances();
    let oracle_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let lemma1 = lemma1_experiment(&Lemma1Config::default()).unwrap();
    let lemma1_secs = start.elapsed().as_secs_f64();
    println!("setup: 100 oracle instances {oracle_secs:.1} s (limit 30 s), lemma1 ensemble {lemma1_secs:.1} s (limit 60 s)");
    let ctx = Context { instances, lemma1 };
    type Criterion = fn(&Context) -> Vec<Check>;
    let criteria: [Criterion; 11] = [
        criterion1,
        criterion2,
        criterion3,
        criterion4,
        criterion5,
        criterion6,
        criterion7,
        criterion8,
        criterion9,
        criterion10,
        criterion11,
    ];
    let mut failed = 0;
    for (i, f) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let checks = f(&ctx);
        let ok = checks.iter().all(|c| c.ok);
        failed += usize::from(!ok);
        let detail: Vec<String> = checks
            .iter()
            .map(|c| format!("{}{}", if c.ok { "" } else { "FAILED " }, c.what))
            .collect();
        println!(
            "criterion {:>2}: {} ({:.2} s) {}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64(),
            detail.join("; ")
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
