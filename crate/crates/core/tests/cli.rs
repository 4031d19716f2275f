//! End-to-end runs of the binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const PI: &str = "3.141592653589793";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mgt-spectra"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn binary")
}

fn json_of(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn critical_reports_coincident_masses() {
    let v = json_of(&["critical", "--alpha", "0.3333333333333333", "--beta", "3"]);
    let c = &v["critical"];
    assert_eq!(c["regime"], "CoincidentMasses");
    for key in ["m1", "m2"] {
        assert!((c[key].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }
}

#[test]
fn spectrum_figure_data_approaches_limits() {
    let dirichlet = format!("1,{PI},40");
    let v = json_of(&["spectrum", "--alpha", "1", "--beta", "2", "--dirichlet", &dirichlet]);
    let fig = &v["figure"];
    assert_eq!(fig["pair_limit_line"].as_f64().unwrap(), -0.25);
    assert_eq!(fig["essential_marker"].as_f64().unwrap(), -0.5);
    let records = fig["records"].as_array().unwrap();
    assert_eq!(records.len(), 3 * 40);
    let modes = v["modes"].as_array().unwrap();
    let dev = |row: &Value| ((row["re1"].as_f64().unwrap() + 0.5).abs(), (row["re2"].as_f64().unwrap() + 0.25).abs());
    let (first, last) = (dev(&modes[0]), dev(&modes[39]));
    assert!(last.0 < first.0 && last.0 < 1e-3);
    assert!(last.1 < first.1 && last.1 < 1e-3);
}

#[test]
fn csv_follows_frozen_schema() {
    let out = run(&["roots", "--alpha", "1", "--beta", "2", "--mu", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "mode,mu,re1,im1,re2,im2,re3,im3,kind");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 9);
    assert_eq!(row[8], "OneRealPlusPair");
    let re2: f64 = row[4].parse().unwrap();
    assert!((re2 + 0.21507985450097337).abs() < 1e-15);
}

#[test]
fn spectrum_report_round_trips_sigma_max() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("spectrum.json");
    let dirichlet = format!("0.7,{PI},25");
    let out = run(&[
        "spectrum", "--alpha", "0.2", "--beta", "1.3", "--dirichlet", &dirichlet, "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let first: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let again = json_of(&["spectrum", "--alpha", "0.2", "--beta", "1.3", "--report", report.to_str().unwrap()]);
    assert_eq!(first["sigma_max"].as_f64().unwrap().to_bits(), again["sigma_max"].as_f64().unwrap().to_bits());
    assert_eq!(first["modes"], again["modes"]);
}

#[test]
fn sweep_shows_every_dominant_case() {
    let out = run(&["sweep", "--beta", "1", "--sweep-alpha", "0.01,0.9,90", "--mu-list", "5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for case in ["PairDominant", "PairBelowEssential", "ThreeRealEssential"] {
        assert!(text.contains(case), "{case} missing");
    }
    assert!(text.contains("ConjugatePairOfMode(1)") && text.contains("EssentialPoint"));
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn mode_files_and_validation_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.txt", "1\n1\n2\n");
    let v = json_of(&["roots", "--alpha", "1", "--beta", "2", "--modes", &good]);
    assert_eq!(v["modes"].as_array().unwrap().len(), 3);

    let bad = write(dir.path(), "bad.txt", "2\n1\n");
    let out = run(&["roots", "--alpha", "1", "--beta", "2", "--modes", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt:2:"));

    let out = run(&["metric", "--alpha", "2", "--beta", "1", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["roots", "--alpha", "1", "--beta", "2", "--mu", "1", "--dirichlet", "1,1,3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["spectrum", "--alpha", "-1", "--beta", "2", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn metric_resolves_isometric_spaces() {
    let v = json_of(&["metric", "--alpha", "1", "--beta", "2", "--mu", "4", "--space", "h2"]);
    assert_eq!(v["space"], "H1");
    assert_eq!(v["via_isometry"], true);
    assert_eq!(v["kind"], "Normality");
    assert!(v["blocks"][0]["normality_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn decay_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let dirichlet = format!("1,{PI},8");
    let go = |seed: &str, name: &str| {
        let path = dir.path().join(name);
        let out = run(&[
            "decay", "--alpha", "1", "--beta", "2", "--dirichlet", &dirichlet, "--t-end", "10", "--dt", "0.01",
            "--seed", seed, "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(path).unwrap()
    };
    let a = go("42", "a.json");
    let b = go("42", "b.json");
    let c = go("43", "c.json");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["holds"], true);
    assert!(v["expansion_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn decay_with_defective_mode_uses_adjusted_metric() {
    // μ₁ = m1 for (α, β) = (1/6, 11/6).
    let critical = json_of(&["critical", "--alpha", &(1.0f64 / 6.0).to_string(), "--beta", &(11.0f64 / 6.0).to_string()]);
    let m1 = critical["critical"]["m1"].as_f64().unwrap();
    let list = format!("{m1},4,9");
    let v = json_of(&[
        "decay", "--alpha", &(1.0f64 / 6.0).to_string(), "--beta", &(11.0f64 / 6.0).to_string(), "--mu-list", &list,
        "--t-end", "20", "--dt", "0.02",
    ]);
    assert_eq!(v["metric_kind"], "Adjusted");
    assert_eq!(v["holds"], true);
    assert!(v["expansion_residual"].is_null());
}
