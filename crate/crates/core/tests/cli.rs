//! End-to-end runs of the `surf` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn surf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surf")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn lkc_white_noise_manifest() {
    let v = json(&surf(&["lkc", "--preset", "stat1d", "--fwhm", "3", "--r", "11"]));
    assert_eq!(v["tool"], "surf");
    assert_eq!(v["command"], "lkc");
    assert_eq!(v["config"]["r"], 11);
    let l1 = v["result"]["values"][1].as_f64().unwrap();
    assert!((l1 - 55.50).abs() / 55.50 < 5e-3, "{l1}");
}

#[test]
fn lkc_csv_feeds_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = surf(&["--out", d, "lkc", "--preset", "stat2d", "--fwhm", "3", "--source", "closed-form"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("lkc.csv")).unwrap();
    assert!(csv.starts_with("# surf "));
    assert!(csv.lines().nth(1).unwrap().starts_with("# config: {"));
    assert!(dir.path().join("lkc.json").exists());
    let lkc = dir.path().join("lkc.csv");
    let v = json(&surf(&["threshold", "--lkc", lkc.to_str().unwrap(), "--alpha", "0.05"]));
    let l = &v["result"]["lkcs"];
    assert!((l[2].as_f64().unwrap() - 123.23).abs() < 0.01);
    let u = v["result"]["u_alpha"].as_f64().unwrap();
    assert!(u > 3.0 && u < 4.0);
}

#[test]
fn threshold_from_values_in_csv_format() {
    let out = surf(&["--format", "csv", "threshold", "--values", "1,55.5", "--field", "t", "--df", "49"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("0.05,t,49.0,"), "{last}");
}

#[test]
fn census_and_alias_agree() {
    let a = json(&surf(&["census", "--preset", "nonstat3d"]));
    let b = json(&surf(&["manifold", "census", "--preset", "nonstat3d"]));
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["result"]["euler_characteristic"], 2);
}

#[test]
fn sample_then_estimate_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("fields.srf");
    let f = file.to_str().unwrap();
    assert!(surf(&["--seed", "4", "sample", "--preset", "stat1d", "--n", "10", "--file", f]).status.success());
    let v = json(&surf(&["lkc", "--preset", "stat1d", "--source", "ensemble", "--data", f]));
    assert_eq!(v["result"]["source"], "estimate");
    let points = dir.path().join("points.csv");
    std::fs::write(&points, "x1\n10.25\n50.5\n").unwrap();
    let v = json(&surf(&[
        "surf",
        "eval",
        "--data",
        f,
        "--points",
        points.to_str().unwrap(),
        "--fwhm",
        "3",
        "--t-field",
        "--order",
        "gradient",
    ]));
    assert_eq!(v["result"].as_array().unwrap().len(), 2);
}

#[test]
fn nondegeneracy_failure_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    std::fs::write(&one, "x1,x2\n0,0\n").unwrap();
    let out = surf(&["check-nondegeneracy", "--domain", one.to_str().unwrap(), "--point", "0.1,0.2"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["all_pass"], false);
}

#[test]
fn fwer_dry_run_and_errors() {
    let v = json(&surf(&["--dry-run", "fwer-sim", "--preset", "stat1d", "--n-reps", "3"]));
    assert_eq!(v["config"]["n_reps"], 3);
    assert_eq!(v["result"]["dry_run"], true);
    assert_eq!(surf(&["fwer-sim", "--r-scan", "2"]).status.code(), Some(1));
    assert_eq!(surf(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn small_fwer_run() {
    let v = json(&surf(&[
        "--seed",
        "1",
        "--threads",
        "2",
        "fwer-sim",
        "--preset",
        "stat1d",
        "--n-subjects",
        "10",
        "--n-reps",
        "4",
    ]));
    let modes = v["result"]["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 3);
    assert_eq!(v["result"]["completed"], 4);
}
