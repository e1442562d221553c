use std::path::Path;
use std::process::{Command, Output};

use cis_cli::ResultRecord;

fn cis(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cis"))
        .args(args)
        .env("CIS_CACHE_DIR", cache)
        .env_remove("CIS_THREADS")
        .output()
        .expect("spawn cis")
}

fn json(cache: &Path, args: &[&str]) -> ResultRecord {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = cis(cache, &full);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid record")
}

#[test]
fn documented_examples() {
    let dir = tempfile::tempdir().unwrap();
    let rec = json(dir.path(), &["l1-closed", "--m", "1"]);
    assert!((rec.value.as_f64().unwrap() - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    assert!(rec.detail.unwrap()["decimal"].as_str().unwrap().starts_with("1.71828182845904523536"));

    let rec = json(dir.path(), &["prob-complete", "--m", "2", "--n", "2", "--engine", "hk"]);
    assert_eq!(rec.value, "5/6");
    assert_eq!(rec.schema, 1);
    for engine in ["gf", "brute"] {
        let rec = json(dir.path(), &["prob-complete", "--m", "2", "--n", "2", "--engine", engine]);
        assert_eq!(rec.value, "5/6");
    }

    let rec = json(dir.path(), &["invgamma", "--y", "24"]);
    assert!((rec.value.as_f64().unwrap() - 5.0).abs() < 1e-12);

    let rec = json(dir.path(), &["cardgame", "--strategy", "shifting", "--m", "2", "--n", "3", "--word", "211323"]);
    assert_eq!(rec.value, 3);
    assert_eq!(rec.detail.unwrap()["feedback"], "FTFFTT");
}

#[test]
fn plain_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = cis(dir.path(), &["--no-cache", "invgamma", "--y", "24"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "invgamma(y=24.0) = 5.0\n");
    let out = cis(dir.path(), &["--format", "csv", "recip-series", "--m", "2", "--k", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "approx,c,k");
    assert!(lines[2].starts_with("-0.25,-1/4,1"));
    let file = dir.path().join("out.json");
    let out = cis(dir.path(), &["--format", "json", "--out", file.to_str().unwrap(), "l1-approx", "--m", "2"]);
    assert!(out.status.success() && out.stdout.is_empty());
    let rec: ResultRecord = serde_json::from_str(&std::fs::read_to_string(file).unwrap()).unwrap();
    assert_eq!(rec.value.as_f64(), Some(2.75));
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = json(dir.path(), &["l1-exact", "--m", "6"]);
    assert!(!first.meta.cached);
    let second = json(dir.path(), &["l1-exact", "--m", "6"]);
    assert!(second.meta.cached);
    assert_eq!(first.value, second.value);
    assert_eq!(first.detail, second.detail);

    std::fs::remove_dir_all(dir.path()).unwrap();
    let third = json(dir.path(), &["l1-exact", "--m", "6"]);
    assert!(!third.meta.cached);
    assert_eq!(third.value, first.value);

    // Sampling commands are cached only with an explicit seed.
    let args = ["mc", "l1", "--m", "2", "--n", "10", "--trials", "100"];
    assert!(!json(dir.path(), &args).meta.cached);
    assert!(!json(dir.path(), &args).meta.cached);
    let seeded: Vec<&str> = args.iter().copied().chain(["--seed", "3"]).collect();
    assert!(!json(dir.path(), &seeded).meta.cached);
    assert!(json(dir.path(), &seeded).meta.cached);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| cis(dir.path(), args).status.code();
    assert_eq!(code(&["l1-closed"]), Some(2));
    assert_eq!(code(&["invgamma", "--y", "0.5"]), Some(2));
    assert_eq!(code(&["mc", "l1", "--m", "2", "--n", "5", "--trials", "1"]), Some(2));
    assert_eq!(code(&["bounds", "lower-cont", "--m", "1", "--n", "10"]), Some(2));
    assert_eq!(code(&["l1-exact", "--m", "3", "--max-n", "4"]), Some(3));
    assert_eq!(code(&["prob-complete", "--m", "5", "--n", "6", "--engine", "brute"]), Some(4));
    assert_eq!(code(&["bounds", "gv-code", "--m", "10", "--n", "8", "--delta", "2"]), Some(4));
    assert_eq!(code(&["--version"]), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_cis"))
        .args(["mc", "l1", "--m", "2", "--n", "5"])
        .env("CIS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_commands() {
    let dir = tempfile::tempdir().unwrap();
    let v = |args: &[&str]| json(dir.path(), args);
    assert_eq!(v(&["bounds", "tail", "--m", "1", "--n", "4", "--k", "4"]).value, "1/24");
    assert_eq!(v(&["bounds", "completion-lower", "--m", "2", "--n", "3", "--t-size", "8", "--delta", "1"]).value, "0");
    let rec = v(&["bounds", "expectation-upper", "--m", "1", "--cap", "120"]);
    assert_eq!(rec.value.as_f64(), Some(7.0));
    let rec = v(&["bounds", "gv-code", "--m", "2", "--n", "4", "--delta", "1", "--list"]);
    assert_eq!(rec.value, 16);
    assert_eq!(rec.detail.as_ref().unwrap()["words"].as_array().unwrap().len(), 16);
    assert_eq!(v(&["bounds", "entropy", "--n", "10", "--delta", "5"]).value, true);
    let rec = v(&["bounds", "factorial-threshold", "--m", "2", "--t", "2048", "--c", "0.1"]);
    assert_eq!(rec.detail.unwrap()["upper_ok"], true);
    let rec = v(&["bounds", "block-lower", "--m", "1", "--n", "5", "--k", "5", "--exact"]);
    assert_eq!(rec.value, "1/120");
    let rec = v(&["roots", "--m", "6", "--check-power-sums", "--partition"]);
    assert_eq!(rec.value.as_array().unwrap().len(), 6);
    assert!(rec.detail.unwrap()["power_sum_max_deviation"].as_f64().unwrap() < 1e-9);
}

#[test]
fn verify_all_quick_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = cis(dir.path(), &["verify-all", "--level", "quick"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).collect();
    assert_eq!(lines.len(), 13, "{text}");
    let failed: Vec<&str> = lines.iter().copied().filter(|l| l.starts_with("[FAIL]")).collect();
    assert_eq!(out.status.code(), Some(if failed.is_empty() { 0 } else { 1 }));
    // The safe-strategy benchmark in C10 is out of reach at m=2; every other
    // criterion must pass.
    assert!(failed.iter().all(|l| l.starts_with("[FAIL] 10 ")), "{text}");
}
