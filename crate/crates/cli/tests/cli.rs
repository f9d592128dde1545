use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dtlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("DTLAB_SEED")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).expect("file exists")).expect("valid json")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn bounds_table_values() {
    let dir = TempDir::new().unwrap();
    let o = dtlab(
        dir.path(),
        &["bounds", "--s", "2", "--c", "1", "--t", "0.9", "--exact"],
    );
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(
        text.contains("0.428571") && text.contains("0.333333") && text.contains("3/7"),
        "{text}"
    );

    let o = dtlab(
        dir.path(),
        &["bounds", "--s", "1", "--c", "1", "--t", "0.5"],
    );
    assert_eq!(stdout(&o).matches("0.577350").count(), 2);

    let o = dtlab(
        dir.path(),
        &[
            "--format", "csv", "bounds", "--d", "0.1", "--c", "1", "--m", "0.05", "--t", "0.05",
        ],
    );
    let line = stdout(&o)
        .lines()
        .find(|l| l.starts_with("unza_chain"))
        .unwrap()
        .to_string();
    let cos: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((cos - 0.845154).abs() < 1e-6);
    assert!(dir.path().join("bounds.csv").exists());
}

#[test]
fn out_of_range_input_exits_with_one_and_still_writes_a_manifest() {
    let dir = TempDir::new().unwrap();
    let o = dtlab(dir.path(), &["bounds", "--s", "1", "--t", "1.5"]);
    assert_eq!(code(&o), 1);
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["status"], "error");
    assert!(m["error"].as_str().unwrap().contains("t = 1.5"));

    for args in [
        &["simulate", "lemma1", "--t", "0.001", "--N", "64"][..],
        &["example", "1", "--p", "0.9"],
        &["example", "1"],
        &["no-such-command"],
        &[
            "analyze",
            "--measure",
            "{\"type\": \"mixture\",\n \"components\": [{\"type\": \"dirac\", \"at\": [0, 0]}]}",
        ],
        &["analyze", "--measure", "/nonexistent/spec.json"],
        &["simulate", "lemma1", "--N", "abc"],
    ] {
        let o = dtlab(dir.path(), args);
        assert_eq!(
            code(&o),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!String::from_utf8_lossy(&o.stderr).contains("panicked"));
    }
}

#[test]
fn malformed_spec_message_names_a_line() {
    let dir = TempDir::new().unwrap();
    let spec = "{\"type\": \"mixture\",\n \"components\": [{\"type\": \"diracx\"}]}";
    let o = dtlab(dir.path(), &["analyze", "--measure", spec]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn family_verdicts() {
    let dir = TempDir::new().unwrap();
    for (args, verdict) in [
        (
            vec![
                "analyze", "--family", "example1", "--p", "2", "--n-max", "1000", "--c", "1",
            ],
            "fails_NZA",
        ),
        (
            vec![
                "analyze", "--family", "example3", "--n-max", "1000", "--c", "1",
            ],
            "inconclusive",
        ),
        (
            vec![
                "analyze", "--family", "example2", "--n-max", "1000", "--c", "1",
            ],
            "fails_UNZA",
        ),
        (vec!["example", "1", "--p", "3.9"], "fails_NZA"),
        (vec!["example", "1", "--p", "4.1"], "inconclusive"),
    ] {
        let o = dtlab(dir.path(), &args);
        assert!(matches!(code(&o), 0 | 2), "{args:?}");
        let report = json(&dir.path().join("report.json"));
        assert_eq!(report["verdict"], verdict, "{args:?}");
        let m = json(&dir.path().join("manifest.json"));
        assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
        let traces = std::fs::read_to_string(dir.path().join("traces.csv")).unwrap();
        assert!(traces
            .starts_with("n,re_a_n,im_a_n,t_n,d_n,m_n_lo,m_n_hi,ratio_unza,ratio_nza,chain_cos"));
    }
}

#[test]
fn example2_reports_the_gap_discrepancy_with_warning_exit() {
    let dir = TempDir::new().unwrap();
    let o = dtlab(dir.path(), &["example", "2"]);
    assert_eq!(code(&o), 2);
    let report = json(&dir.path().join("report.json"));
    assert!(report["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w.as_str().unwrap().contains("gap discrepancy")));
    assert!(report["gap_discrepancy"].is_array());
    assert_eq!(
        json(&dir.path().join("manifest.json"))["status"],
        "warnings"
    );
}

#[test]
fn example3_limit_table() {
    let dir = TempDir::new().unwrap();
    let o = dtlab(dir.path(), &["example", "3", "--n-max", "10000"]);
    assert!(matches!(code(&o), 0 | 2));
    let lim = json(&dir.path().join("example3_limits.json"));
    assert!((lim["r_n"].as_f64().unwrap() - 2.885390).abs() <= 1e-3);
    assert!((lim["branch_value"].as_f64().unwrap() - 0.443766).abs() <= 1e-3);
    assert!(lim["max_scan_rel_diff"].as_f64().unwrap() <= 1e-12);
    let table = std::fs::read_to_string(dir.path().join("example3_fn.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 9999);
    assert_eq!(
        json(&dir.path().join("report.json"))["verdict"],
        "inconclusive"
    );
}

#[test]
fn simulate_reruns_are_bit_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = [
        "simulate", "lemma1", "--N", "64", "--trials", "1", "--seed", "7",
    ];
    assert_eq!(code(&dtlab(a.path(), &args)), 0);
    assert_eq!(code(&dtlab(b.path(), &args)), 0);
    for f in [
        "experiment.csv",
        "trials.csv",
        "summary.json",
        "manifest.json",
    ] {
        let read = |d: &TempDir| std::fs::read(d.path().join(f)).unwrap();
        if f == "manifest.json" {
            // argv differs only in the output directory.
            let (mut x, mut y) = (json(&a.path().join(f)), json(&b.path().join(f)));
            for v in [&mut x, &mut y] {
                v["argv"] = Value::Null;
                v["config"]["out"] = Value::Null;
            }
            assert_eq!(x, y);
        } else {
            assert_eq!(read(&a), read(&b), "{f}");
        }
    }
    let t2 = [
        "simulate",
        "theorem2",
        "--schedule",
        "0.5,0.25,0.125",
        "--N",
        "48",
        "--trials",
        "2",
        "--seed",
        "7",
    ];
    assert_eq!(code(&dtlab(a.path(), &t2)), 0);
    let seq = [&["--exec", "sequential"][..], &t2].concat();
    assert_eq!(code(&dtlab(b.path(), &seq)), 0);
    let read = |d: &TempDir| std::fs::read(d.path().join("experiment.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn seed_from_environment_wins() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["simulate", "lemma1", "--N", "32", "--trials", "1"];
    dtlab(a.path(), &[&args[..], &["--seed", "11"]].concat());
    let o = Command::new(env!("CARGO_BIN_EXE_dtlab"))
        .arg("--out")
        .arg(b.path())
        .args(args)
        .args(["--seed", "3"])
        .env("DTLAB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let read = |d: &TempDir| std::fs::read(d.path().join("experiment.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let m = json(&b.path().join("manifest.json"));
    assert_eq!(m["seed"], 11);
    assert_eq!(m["seed_source"], "env");
}

#[test]
fn theorem2_summary_flags_the_trend() {
    let dir = TempDir::new().unwrap();
    let o = dtlab(
        dir.path(),
        &[
            "simulate",
            "theorem2",
            "--schedule",
            "0.5,0.25,0.125",
            "--N",
            "96",
            "--trials",
            "4",
        ],
    );
    assert_eq!(code(&o), 0);
    let s = json(&dir.path().join("summary.json"));
    assert_eq!(s["nondecreasing"], true);
    assert_eq!(s["steps"].as_array().unwrap().len(), 3);
}

#[test]
fn lemma1_default_ensemble_satisfies_the_bound() {
    let dir = TempDir::new().unwrap();
    let o = dtlab(
        dir.path(),
        &[
            "simulate",
            "lemma1",
            "--t",
            "0.5",
            "--s-prime",
            "0.9",
            "--s",
            "1",
            "--c",
            "1",
            "--N",
            "256",
            "--trials",
            "50",
            "--seed",
            "7",
        ],
    );
    assert_eq!(code(&o), 0);
    let s = json(&dir.path().join("summary.json"));
    assert!(s["satisfied_fraction"].as_f64().unwrap() >= 0.9);
    let rows = std::fs::read_to_string(dir.path().join("experiment.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 100);
}
