mod support;

use std::path::PathBuf;
use std::process::{Command, Output};

use support::unconditional;

fn gdyne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdyne")).args(args).env_remove("GDYNE_THREADS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

/// Data rows of a CSV report, skipping the metadata line and the header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(2).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

const ENSEMBLE: [&str; 14] =
    ["trajectory", "--omega", "0.2", "--deps", "0.03", "--phi", "0.6", "--eta", "0.8", "--ensemble", "2500", "--seed", "42", "--t-end=20"];

#[test]
fn seeded_ensembles_are_reproducible() {
    let args = [&ENSEMBLE[..], &["--probe-times", "5,10,20"]].concat();
    let a = gdyne(&args);
    let b = gdyne(&args);
    assert_eq!(stdout(&a), stdout(&b));
    let other = [&ENSEMBLE[..12], &["43", "--t-end=20", "--probe-times", "5,10,20"]].concat();
    assert_ne!(stdout(&a), stdout(&gdyne(&other)));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [&ENSEMBLE[..], &["--probe-times", "5,20"]].concat();
    let single = stdout(&gdyne(&args));
    let many = Command::new(env!("CARGO_BIN_EXE_gdyne")).args(&args).env("GDYNE_THREADS", "4").output().unwrap();
    assert_eq!(single, stdout(&many));
    let flag = [&args[..], &["--threads", "3"]].concat();
    assert_eq!(single, stdout(&gdyne(&flag)));
}

#[test]
fn replay_reproduces_reports() {
    for format in ["csv", "json"] {
        let path = scratch(&format!("replay.{format}"));
        let p = path.to_str().unwrap();
        let first = gdyne(&["--format", format, "-o", p, "steady", "--omega", "0.18:0.2:0.01", "--phi", "0.6", "--eta", "0.5,1"]);
        stdout(&first);
        let original = std::fs::read(&path).unwrap();
        let again = gdyne(&["replay", p]);
        assert_eq!(original, again.stdout, "{format}");
    }
    let path = scratch("replay-trajectory.csv");
    let p = path.to_str().unwrap();
    stdout(&gdyne(&[&["-o", p], &ENSEMBLE[..], &["--probe-times", "10"]].concat()));
    assert_eq!(std::fs::read(&path).unwrap(), gdyne(&["replay", p]).stdout);
}

#[test]
fn empty_grid_is_a_configuration_error() {
    let out = gdyne(&["steady", "--omega", "", "--phi", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gdyne(&["steady", "--omega", "0.3:0.2:0.01", "--phi", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_efficiency_is_reported_as_json() {
    let out = gdyne(&["becp-detect", "--phi", "0.6", "--eta", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "eta_zero");
    assert!(out.stdout.is_empty());
}

#[test]
fn unmonitored_steady_state_is_the_unconditional_one() {
    let text = stdout(&gdyne(&["steady", "--omega", "0.3,0.6,1.2", "--deps", "0.1", "--phi", "0.5", "--eta", "0"]));
    for row in rows(&text) {
        let w: f64 = row[0].parse().unwrap();
        let e = (w * w + 0.25f64).sqrt() - 0.1;
        let s = unconditional(w, e, 1.0);
        let got: Vec<f64> = row[2..5].iter().map(|v| v.parse().unwrap()).collect();
        for (g, want) in got.iter().zip([s[(0, 0)], s[(1, 1)], s[(0, 1)]]) {
            assert!((g - want).abs() < 1e-8 * want.abs().max(1.0), "ω = {w}: {g} vs {want}");
        }
        assert_eq!(row[5], "ok");
    }
}

#[test]
fn fisher_column_is_nondecreasing() {
    let text = stdout(&gdyne(&["fisher", "--omega", "0.5", "--eps", "0.3", "--phi", "0.3", "--eta", "0.7"]));
    let f: Vec<f64> = rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(f.len() > 10);
    assert!(f.windows(2).all(|v| v[1] >= v[0]));
    let meta: serde_json::Value = serde_json::from_str(text.lines().next().unwrap().trim_start_matches("# ")).unwrap();
    assert!(meta["summary"]["k_F"].as_f64().unwrap() > 0.0);
}

#[test]
fn short_fisher_runs_fail_numerically() {
    let out = gdyne(&["fisher", "--omega", "0.2", "--deps", "0.03", "--phi", "0.58", "--t-end", "50"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "not_converged");
}

#[test]
fn analytic_qfi_reports_the_rate() {
    let text = stdout(&gdyne(&["--format", "json", "qfi", "--omega", "0.2", "--eps", "0.45"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let k_g = v["rows"][0][0].as_f64().unwrap();
    assert!((k_g - 190.659358600583).abs() < 1e-8 * k_g);
}
