//! End-to-end runs of the `kmsdb` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const QUBIT: &str = r#"{"model":"diagonal","entries":[-1,1]}"#;
const CONSTRUCTIONS: [&str; 5] = ["davies", "coherent", "oft", "two-sided", "interpolated"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmsdb")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn matrix(v: &Value) -> Vec<Vec<(f64, f64)>> {
    let re = v["re"].as_array().unwrap();
    let im = v["im"].as_array().unwrap();
    re.iter()
        .zip(im)
        .map(|(r, i)| {
            r.as_array().unwrap().iter().zip(i.as_array().unwrap()).map(|(a, b)| (a.as_f64().unwrap(), b.as_f64().unwrap())).collect()
        })
        .collect()
}

/// Numeric comparison of two JSON documents, exact for everything but
/// numbers.
fn assert_json_close(got: &Value, want: &Value, tol: f64, at: &str) {
    match (got, want) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            assert!((a - b).abs() <= tol * b.abs().max(1.0), "{at}: {a} vs {b}");
        }
        (Value::Array(a), Value::Array(b)) => {
            assert_eq!(a.len(), b.len(), "{at}: array length");
            for (k, (x, y)) in a.iter().zip(b).enumerate() {
                assert_json_close(x, y, tol, &format!("{at}[{k}]"));
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>(), "{at}: keys");
            for (k, x) in a {
                assert_json_close(x, &b[k], tol, &format!("{at}.{k}"));
            }
        }
        _ => assert_eq!(got, want, "{at}"),
    }
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn verify_qubit_example_passes() {
    let out = run(&["verify", "--model", QUBIT, "--construction", "coherent", "--profile", "sqrt-metropolis"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = stdout_json(&out);
    assert_eq!(r["schema_version"], 1);
    assert!(r["transition"]["db_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["pass"], true);
    assert_eq!(r["config"]["profile_resolved"], "sqrt-metropolis");
    assert_eq!(r["tolerances"]["db_residual"].as_f64(), Some(1e-9));
}

#[test]
fn verify_with_discrete_channel_checks_cptp() {
    for scheme in ["exact", "taylor:12", "recursive:3"] {
        let out = run(&["verify", "--model", "ising-L2", "--discrete", scheme]);
        assert!(out.status.success(), "{scheme}: {}", String::from_utf8_lossy(&out.stdout));
        let r = stdout_json(&out);
        let ch = &r["channel"];
        assert!(ch["trace_residual"].as_f64().unwrap() <= 1e-9, "{scheme}");
        assert!(ch["cp_min_eig"].as_f64().unwrap() >= -1e-9, "{scheme}");
        assert!(ch["gap"].as_f64().unwrap() > 0.0, "{scheme}");
    }
}

#[test]
fn truncated_taylor_completion_is_reported_as_inexact() {
    let out = run(&["verify", "--model", "ising-L2", "--discrete", "taylor:6"]);
    assert_eq!(out.status.code(), Some(1));
    let r = stdout_json(&out);
    let trace = r["channel"]["trace_residual"].as_f64().unwrap();
    assert!(trace > 1e-9 && trace < 1e-5, "{trace}");
}

#[test]
fn failed_checks_exit_with_one() {
    let out = run(&["verify", "--model", "ising-L2", "--discrete", "exact", "--tol=-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["pass"], false);
}

#[test]
fn empty_transition_completes_to_identity() {
    let out = run(&["construct", "--model", QUBIT, "--jumps", "none", "--discrete", "exact"]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    let kraus = r["channel"]["map"]["kraus"].as_array().unwrap();
    assert_eq!(kraus.len(), 1);
    let k = matrix(&kraus[0]);
    for (i, row) in k.iter().enumerate() {
        for (j, &(re, im)) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((re - want).abs() < 1e-12 && im.abs() < 1e-12);
        }
    }
    assert_eq!(r["channel"]["provenance"]["kind"], "exact-k");
}

/// One golden report per construction; regenerate with `UPDATE_GOLDEN=1`.
#[test]
fn construct_matches_golden_files() {
    let model = r#"{"model":"diagonal","entries":[-0.6,0.2,0.9]}"#;
    for name in CONSTRUCTIONS {
        let out = run(&["construct", "--model", model, "--construction", name, "--jumps", "hopping", "--sigma", "0.7"]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let path = golden_path(&format!("construct_{name}.json"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&path, &out.stdout).unwrap();
        }
        let want: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_json_close(&stdout_json(&out), &want, 1e-10, name);
    }
}

#[test]
fn gap_sweep_csv_starts_at_one() {
    let out = run(&["gap-sweep", "--model", "ising-L3", "--construction", "coherent", "--format", "csv", "--betas", "0:0.1:0.05"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model,L,beta,construction,gap_continuous,gap_discrete,mixing_time_est,db_residual"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[2], "0.0");
    assert!((first[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(lines.count(), 2);
}

#[test]
fn sweep_reports_are_identical_across_job_counts() {
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, jobs) in dirs.iter().zip(["1", "3"]) {
        let out = run(&[
            "gap-sweep", "--model", "ising-L2", "--format", "csv", "--betas", "0:0.5:0.1", "--jobs", jobs, "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&dirs[0], "gap_sweep.csv"), read(&dirs[1], "gap_sweep.csv"));
    let meta: Value = serde_json::from_slice(&read(&dirs[0], "gap_sweep.meta.json")).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["config"]["model"]["L"], 2);
    assert_eq!(meta["config"]["discrete"], "exact");
    assert!(meta["summary"]["all_discrete_bounds_hold"].as_bool().unwrap());
}

#[test]
fn seeded_random_models_reproduce() {
    let a = run(&["verify", "--model", "random-d3", "--seed", "7", "--jumps", "hopping"]);
    let b = run(&["verify", "--model", "random-d3", "--seed", "7", "--jumps", "hopping"]);
    let c = run(&["verify", "--model", "random-d3", "--seed", "8", "--jumps", "hopping"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(stdout_json(&a)["config"]["model"]["model"], "matrix");
}

#[test]
fn mix_curves_reach_the_threshold() {
    let out = run(&["mix", "--model", "ising-L2", "--format", "json", "--times", "0:30:1"]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    assert!(r["mixing_time"].as_f64().is_some());
    for curve in r["curves"].as_array().unwrap() {
        let last = curve.as_array().unwrap().last().unwrap().as_f64().unwrap();
        assert!(last < 1e-3);
    }
    let csv = run(&["mix", "--model", "ising-L2", "--format", "csv", "--discrete", "exact", "--times", "0:5:1"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("time,zeros,ones,plus,lazy_zeros,lazy_ones,lazy_plus\n"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn oracle_suites_pass() {
    let out = run(&["oracle"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let r = stdout_json(&out);
    assert_eq!(r["checks"].as_array().unwrap().len(), 8);
}

#[test]
fn errors_are_single_line_records() {
    for args in [
        vec!["verify", "--model", "{not json"],
        vec!["verify", "--model", "ising-L2", "--construction", "glauber-ish"],
        vec!["verify", "--model", "ising-L2", "--discrete", "taylor:x"],
        vec!["gap-sweep", "--model", "ising-L6"],
        vec!["construct", "--model", "ising-L2", "--format", "csv"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        let v: Value = serde_json::from_str(&err).unwrap();
        assert!(v["error"]["kind"].is_string() && v["error"]["message"].is_string(), "{err}");
    }
    let size = run(&["gap-sweep", "--model", "ising-L6"]);
    let v: Value = serde_json::from_slice(&size.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "size");
}
