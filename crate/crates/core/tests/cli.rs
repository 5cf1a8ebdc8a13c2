use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use swapsteer::qlinalg::CMatrix;
use swapsteer::states::{
    max_entangled, random_separable, save_ket, save_operator, save_state, seeded_rng, DensityMatrix,
};

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn phi_plus(&self, d: usize) -> PathBuf {
        let p = self.path(&format!("phi{d}.json"));
        save_ket(&max_entangled(d), &p).unwrap();
        p
    }

    fn state(&self, name: &str, rho: &DensityMatrix) -> PathBuf {
        let p = self.path(name);
        save_state(rho, &p).unwrap();
        p
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swapsteer"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn check_reports_both_criteria() {
    let ws = Workspace::new();
    let r = json_ok(&["check", s(&ws.phi_plus(2))]);
    assert_eq!(r["command"], "check");
    assert_eq!(r["results"]["ppt"]["is_npt"], true);
    assert!((f(&r["results"]["ccn"]["coefficient_sum"]) - 2.0).abs() < 1e-9);
    assert!(r["version"].is_string());

    let mixed = ws.state("mixed.json", &DensityMatrix::maximally_mixed((2, 2)));
    let r = json_ok(&["check", s(&mixed)]);
    assert_eq!(r["results"]["ppt"]["is_npt"], false);
    assert!((f(&r["results"]["ccn"]["coefficient_sum"]) - 0.5).abs() < 1e-9);
}

#[test]
fn malformed_input_exits_2() {
    let ws = Workspace::new();
    let bad = ws.path("bad.json");
    std::fs::write(&bad, "{ \"dims\": [2, 2], \"matrix\": ").unwrap();
    let out = run(&["check", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    assert_eq!(run(&["check"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--bogus"]).status.code(), Some(2));
}

#[test]
fn witness_builders() {
    let ws = Workspace::new();
    let spec = ws.path("npt.json");
    let r = json_ok(&[
        "witness",
        "--out",
        s(&spec),
        "npt",
        "--state",
        s(&ws.phi_plus(2)),
    ]);
    assert_eq!(f(&r["results"]["sohs_bound"]), 0.0);
    assert!((f(&r["results"]["predicted_value"]) - 0.125).abs() < 1e-12);
    assert!(spec.exists());

    let r = json_ok(&[
        "witness",
        "--out",
        s(&ws.path("ccn.json")),
        "ccn",
        "--d",
        "3",
    ]);
    assert!((f(&r["results"]["sohs_bound"]) - 1.0 / 3.0).abs() < 1e-15);
    assert!((f(&r["results"]["predicted_value"]) - 1.0).abs() < 1e-12);

    let sep = random_separable((2, 2), None, &mut seeded_rng(1));
    let out = run(&[
        "witness",
        "--out",
        s(&ws.path("x.json")),
        "npt",
        "--state",
        s(&ws.state("sep.json", &sep)),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let r = json_ok(&[
        "witness",
        "--out",
        s(&ws.path("uni.json")),
        "universal",
        "--state",
        s(&ws.phi_plus(2)),
        "--compat-map",
    ]);
    assert_eq!(r["results"]["settings"], 6);
    assert!(f(&r["results"]["gamma_residual"]) < 1e-8);
    assert!((f(&r["results"]["predicted_value"]) - 0.125).abs() < 1e-12);
    assert_eq!(r["results"]["compat_map"]["settings"], 5);
}

#[test]
fn ccn_witness_with_unitaries_and_non_unitary() {
    let ws = Workspace::new();
    let mut m = CMatrix::identity(2);
    m[(0, 0)] = swapsteer::qlinalg::C64::new(2.0, 0.0);
    let bad = ws.path("bad_u.json");
    save_operator(&m, (2, 1), &bad).unwrap();
    let out = run(&[
        "witness",
        "--out",
        s(&ws.path("c.json")),
        "ccn",
        "--d",
        "2",
        "--u-prime",
        s(&bad),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let wrong = ws.path("u3.json");
    save_operator(&CMatrix::identity(3), (3, 1), &wrong).unwrap();
    let out = run(&[
        "witness",
        "--out",
        s(&ws.path("c.json")),
        "ccn",
        "--d",
        "2",
        "--u-prime",
        s(&wrong),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn simulate_ideal_and_noisy() {
    let ws = Workspace::new();
    let spec = ws.path("npt.json");
    let phi2 = ws.phi_plus(2);
    json_ok(&["witness", "--out", s(&spec), "npt", "--state", s(&phi2)]);
    let r = json_ok(&[
        "simulate",
        "--spec",
        s(&spec),
        "--rho1",
        s(&phi2),
        "--ideal",
    ]);
    assert!((f(&r["results"]["value"]) - 0.125).abs() < 1e-9);
    assert_eq!(r["results"]["violation"], true);

    let ccn = ws.path("ccn4.json");
    json_ok(&["witness", "--out", s(&ccn), "ccn", "--d", "4"]);
    let phi4 = ws.phi_plus(4);
    let r = json_ok(&["simulate", "--spec", s(&ccn), "--rho1", s(&phi4), "--ideal"]);
    assert!((f(&r["results"]["value"]) - 1.0).abs() < 1e-9);
    assert!((f(&r["results"]["sohs_bound"]) - 0.25).abs() < 1e-15);

    let mixed = ws.state("mixed.json", &DensityMatrix::maximally_mixed((4, 4)));
    let r = json_ok(&["simulate", "--spec", s(&ccn), "--rho1", s(&mixed)]);
    assert_eq!(r["results"]["violation"], false);

    let out = run(&["simulate", "--spec", s(&ccn), "--rho1", s(&phi2)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bound_methods_and_guard() {
    let ws = Workspace::new();
    let ccn = ws.path("ccn2.json");
    json_ok(&["witness", "--out", s(&ccn), "ccn", "--d", "2"]);
    let r = json_ok(&["bound", "--spec", s(&ccn), "--seed", "7"]);
    assert!((f(&r["results"]["value"]) - 0.5).abs() < 1e-6);
    assert_eq!(r["results"]["discrepancy"], false);
    assert_eq!(r["seed"], 7);
    let again = json_ok(&["bound", "--spec", s(&ccn), "--seed", "7"]);
    assert_eq!(r["results"], again["results"]);

    let npt = ws.path("npt.json");
    json_ok(&[
        "witness",
        "--out",
        s(&npt),
        "npt",
        "--state",
        s(&ws.phi_plus(2)),
    ]);
    let r = json_ok(&["bound", "--spec", s(&npt), "--method", "grid"]);
    assert!(f(&r["results"]["value"]) <= 1e-9);
    let r = json_ok(&["bound", "--spec", s(&npt), "--outcome", "0"]);
    assert!(f(&r["results"]["value"]) <= 1e-6);

    let ccn5 = ws.path("ccn5.json");
    json_ok(&["witness", "--out", s(&ccn5), "ccn", "--d", "5"]);
    let out = run(&["bound", "--spec", s(&ccn5), "--method", "grid"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cost"));
}

#[test]
fn gap_scan_csv() {
    let out = run(&["gap-scan", "--dmax", "6", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["d", "quantum_value", "sohs_bound", "ratio"]
    );
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    let first = &rows[0];
    assert_eq!(first[0], 2.0);
    assert!((first[1] - 1.0).abs() < 1e-12 && (first[2] - 0.5).abs() < 1e-15);
    assert!((first[3] - 2.0).abs() < 1e-8);
    assert!((rows[4][3] - 6.0).abs() < 1e-8);
    assert!(rows.windows(2).all(|w| w[1][3] > w[0][3]));
    // 17 significant digits
    let field = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);

    assert_eq!(run(&["gap-scan", "--dmax", "9"]).status.code(), Some(5));
}

#[test]
fn robustness_and_out_file() {
    let ws = Workspace::new();
    let out = ws.path("rob.json");
    let status = run(&[
        "robustness",
        "--family",
        "ccn",
        "--d",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(status.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((f(&r["results"]["critical_visibility"]) - 1.0 / 6.0).abs() < 1e-6);
    let r = json_ok(&["robustness", "--d", "2", "--steps", "5"]);
    assert!((f(&r["results"]["critical_visibility"]) - 1.0 / 3.0).abs() < 1e-6);
    assert_eq!(r["results"]["sweep"].as_array().unwrap().len(), 5);
}

#[test]
fn library_entry_matches_binary_codes() {
    assert_eq!(
        swapsteer::cli::run(["swapsteer", "gap-scan", "--dmax", "12"]),
        5
    );
    assert_eq!(swapsteer::cli::run(["swapsteer", "nonsense"]), 2);
}
