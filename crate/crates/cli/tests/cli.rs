use mixpath::mixture::Sample;
use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mixpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixpath"))
        .args(args)
        .env_remove("MIXPATH_THREADS")
        .output()
        .expect("spawn mixpath")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn simulate_to(path: &Path, seed: &str, delta: &str, n: &str) {
    let p = path.to_str().unwrap();
    let o = mixpath(&["--seed", seed, "--out", p, "simulate", "--pi", "0.3", "--delta", delta, "--n", n]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&mixpath(&["--help"])), 0);
    assert_eq!(code(&mixpath(&["--version"])), 0);
    assert_eq!(code(&mixpath(&["invert", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&mixpath(&[])), 1);
    assert_eq!(code(&mixpath(&["simulate", "--pi", "0.3"])), 1);
    assert_eq!(code(&mixpath(&["frobnicate"])), 1);
}

#[test]
fn simulate_writes_provenance_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    simulate_to(&a, "7", "1.5", "50");
    simulate_to(&b, "7", "1.5", "50");
    let ta = fs::read_to_string(&a).unwrap();
    assert_eq!(ta, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = ta.lines().collect();
    assert!(lines[0].starts_with("# mixpath "));
    let prov: Value = serde_json::from_str(lines[1].strip_prefix("# provenance: ").unwrap()).unwrap();
    assert_eq!(prov["seed"], 7);
    assert_eq!(prov["config"]["n"], 50);
    assert_eq!(lines[2], "y");
    assert_eq!(lines.len(), 53);

    let c = dir.path().join("c.csv");
    simulate_to(&c, "8", "1.5", "50");
    assert_ne!(ta, fs::read_to_string(&c).unwrap());
}

#[test]
fn sample_csv_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    simulate_to(&a, "3", "-0.75", "200");
    let text = fs::read_to_string(&a).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let s = Sample::read_csv(text.as_bytes()).unwrap();
    let mut out = Vec::new();
    s.write_csv(&mut out).unwrap();
    assert_eq!(String::from_utf8(out.clone()).unwrap(), body);
    let again = Sample::read_csv(out.as_slice()).unwrap();
    let mut out2 = Vec::new();
    again.write_csv(&mut out2).unwrap();
    assert_eq!(out, out2);
}

#[test]
fn estimate_requires_sigma_when_variance_is_known() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    simulate_to(&a, "1", "2", "100");
    let p = a.to_str().unwrap();
    assert_eq!(code(&mixpath(&["estimate", p, "--pi", "0.3"])), 1);
    assert_eq!(code(&mixpath(&["estimate", p, "--pi", "0.3", "--sigma", "1", "--variance", "unknown-equal"])), 1);
    assert_eq!(code(&mixpath(&["estimate", "/nonexistent/file.csv", "--pi", "0.3", "--sigma", "1"])), 1);
}

#[test]
fn estimate_reports_json_and_flags_pileups() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    simulate_to(&a, "1", "4", "400");
    let p = a.to_str().unwrap();
    let o = mixpath(&["estimate", p, "--pi", "0.3", "--sigma", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["provenance"]["command"], "estimate");
    assert_eq!(v["pathology_flag"], false);
    let d = v["estimate"]["delta"].as_f64().unwrap();
    assert!((d - 4.0).abs() < 0.6, "{d}");

    // The moment estimator is undefined whenever k2 <= sigma^2.
    let mut flagged = false;
    for seed in 0..20 {
        let b = dir.path().join(format!("b{seed}.csv"));
        simulate_to(&b, &seed.to_string(), "0.2", "60");
        let o = mixpath(&["estimate", b.to_str().unwrap(), "--pi", "0.3", "--sigma", "1", "--estimator", "mom"]);
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        if v["estimate"]["delta"].is_null() {
            assert_eq!(code(&o), 2);
            assert_eq!(v["pathology_flag"], true);
            flagged = true;
            break;
        }
        assert_eq!(code(&o), 0);
    }
    assert!(flagged);
}

#[test]
fn diagnose_modes_are_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    simulate_to(&a, "1", "1", "100");
    let p = a.to_str().unwrap();
    assert_eq!(code(&mixpath(&["diagnose", "--pi", "0.3"])), 1);
    assert_eq!(code(&mixpath(&["diagnose", "--pi", "0.3", "--input", p, "--delta", "1", "--n", "50"])), 1);
    assert_eq!(code(&mixpath(&["diagnose", "--pi", "0.3", "--delta", "1"])), 1);

    let o = mixpath(&["diagnose", "--pi", "0.3", "--delta", "0.5,2", "--n", "100,1000"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "delta,n,p_pileup,p_signerror,p_correct,method");
    assert_eq!(rows.len(), 5);
    for r in &rows[1..] {
        let f: Vec<f64> = r.split(',').take(5).map(|x| x.parse().unwrap()).collect();
        assert!((f[2] + f[3] + f[4] - 1.0).abs() < 1e-12);
    }

    let o = mixpath(&["--format", "json", "diagnose", "--pi", "0.3", "--input", p, "--b", "200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["forecasts"].as_array().unwrap().len(), 1);
}

#[test]
fn invert_is_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    simulate_to(&a, "5", "1.5", "150");
    let p = a.to_str().unwrap();
    let args = |t: &'static str| {
        mixpath(&["--seed", "11", "--threads", t, "invert", p, "--pi", "0.3", "--b", "199", "--grid", "-4,4,41"])
    };
    let one = args("1");
    let two = args("2");
    assert_eq!(code(&one), code(&two));
    assert_eq!(one.stdout, two.stdout);
    let text = stdout(&one);
    assert!(text.lines().any(|l| l == "delta,p_gridboot,p_wald"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 42);
    assert_eq!(code(&mixpath(&["invert", p, "--pi", "0.3", "--grid", "1,2"])), 1);
}

#[test]
fn invert_2d_marks_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    simulate_to(&a, "5", "1", "300");
    let o = mixpath(&["invert", a.to_str().unwrap(), "--pi", "0.3", "--method", "wald2d", "--grid", "-1,1,11"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "mu0,mu1,p");
    assert_eq!(rows.len(), 122);
    assert_eq!(rows.iter().filter(|r| r.ends_with(',')).count(), 11);
}

#[test]
fn prinstrat_on_bundled_data() {
    let o = mixpath(&["--seed", "2", "prinstrat", "--b", "200"]);
    let c = code(&o);
    assert!(c == 0 || c == 2, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["provenance"]["seed"], 2);
    let t = &v["report"]["estimates"]["treatment"];
    assert_eq!(t["counts"]["treated_takers"], 153);
    assert_eq!(t["counts"]["treated_never"], 125);
}

#[test]
fn prinstrat_rejects_two_sided_noncompliance() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("ps.csv");
    fs::write(&a, "z,d,y\n1,1,0.5\n0,1,0.2\n0,0,0.1\n").unwrap();
    let o = mixpath(&["prinstrat", a.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn study_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    fs::write(
        &cfg,
        r#"{"reps": 100, "estimators": ["mle-known-var"], "inference": ["mle-wald"], "seed": 4,
            "cells": [{"n": 80, "generator": {"kind": "gaussian",
              "spec": {"pi": 0.3, "mu0": 0.7, "mu1": -0.3, "sigma0": 1.0, "sigma1": 1.0, "variance": "known-equal"}}}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = mixpath(&["--out", out.to_str().unwrap(), "study", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let est = fs::read_to_string(out.join("estimators.csv")).unwrap();
    assert!(est.contains("\"seed\":4"));
    assert!(out.join("coverage.csv").exists());
    let s: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["provenance"]["command"], "study");
}

#[test]
fn replicate_lists_ids_on_unknown() {
    let o = mixpath(&["replicate", "fig99"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("table2") && err.contains("fig5"));
}

#[test]
fn replicate_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig5");
    let o = mixpath(&["--out", out.to_str().unwrap(), "replicate", "fig5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = fs::read_to_string(out.join("forecast_vary_n.csv")).unwrap();
    assert!(t.starts_with("# mixpath "));
    assert!(out.join("summary.json").exists());
}
