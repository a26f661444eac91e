use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freegap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut full = vec!["generate"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    ok_stdout(&full);
    path
}

#[test]
fn certify_reports_all_sections() {
    let dir = TempDir::new().unwrap();
    let q = generate(dir.path(), "q.mtx", &["birkhoff", "--n", "40", "--k", "3", "--seed", "5"]);
    let s = ok_stdout(&["certify", "--matrix", q.to_str().unwrap(), "--ell0", "6", "--r", "0.1"]);
    let v: Value = serde_json::from_str(&s).unwrap();
    let c = &v["certificate"];
    let rho = c["rho"].as_f64().unwrap();
    let max = ["norm_proxy", "two_kappa", "delta_star"]
        .iter()
        .map(|k| c[k].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(rho, max);
    assert_eq!(c["dominant_term"], "norm");
    assert_eq!(c["estimator_kind"], "trace_proxy");
    assert_eq!(v["regime"]["convex_small_r"], true);
    assert!(v["epsilon"]["epsilon"].as_f64().unwrap() > 0.0);
}

#[test]
fn moments_csv_header() {
    let dir = TempDir::new().unwrap();
    let q = generate(dir.path(), "q.mtx", &["matching", "--n", "8"]);
    let s = ok_stdout(&["moments", "--matrix", q.to_str().unwrap(), "--ell0", "3", "--format", "csv"]);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("l1,l2,phi"));
    assert_eq!(lines.next(), Some("0,0,1.0"));
    assert_eq!(s.lines().count(), 1 + 16);
}

#[test]
fn kappa_reports_envelope() {
    let dir = TempDir::new().unwrap();
    let q = generate(dir.path(), "q.mtx", &["matching", "--n", "10", "--seed", "2"]);
    let s = ok_stdout(&["kappa", "--matrix", q.to_str().unwrap(), "-L", "6"]);
    let v: Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["envelope_ok"], true);
    assert_eq!(v["kappa"]["support_depth"], "unbounded");
    assert!(v["kappa"]["argmax"]["p"].as_u64().is_some());
}

#[test]
fn trials_are_byte_identical_for_equal_seeds() {
    let dir = TempDir::new().unwrap();
    let q = generate(dir.path(), "q.mtx", &["birkhoff", "--n", "30", "--seed", "1"]);
    let args = |out: &Path| {
        vec![
            "trials".to_string(),
            "--matrix".into(),
            q.to_str().unwrap().into(),
            "--r".into(),
            "0.2".into(),
            "--ell0".into(),
            "4".into(),
            "--trials".into(),
            "6".into(),
            "--seed".into(),
            "77".into(),
            "--power-norm".into(),
            "--c1".into(),
            "1".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        assert!(bin().args(args(p)).status().unwrap().success());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["lambda2_samples"].as_array().unwrap().len(), 6);
    assert_eq!(v["power_norm_samples"].as_array().unwrap().len(), 6);
    assert!(v["epsilon"]["threshold"].as_f64().unwrap() > v["rho"].as_f64().unwrap());
}

#[test]
fn spectrum_writes_csv_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let q = generate(dir.path(), "q.mtx", &["matching", "--n", "20", "--seed", "3"]);
    let out = dir.path().join("spectrum.csv");
    ok_stdout(&[
        "spectrum",
        "--matrix",
        q.to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("re,im\n"));
    assert_eq!(csv.lines().count(), 1 + 19);
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum.csv.json")).unwrap())
            .unwrap();
    assert_eq!(side["count"], 19);
    assert!(side["max_modulus"].as_f64().unwrap() <= 2.0 + 1e-9);
}

#[test]
fn oracle_estimates_word() {
    let dir = TempDir::new().unwrap();
    let q = generate(dir.path(), "q.mtx", &["matching", "--n", "4"]);
    let s = ok_stdout(&["oracle", "--matrix", q.to_str().unwrap(), "--word", "q2", "--trials", "20"]);
    let v: Value = serde_json::from_str(&s).unwrap();
    // a matching squares to the identity
    assert_eq!(v["estimate"]["mean"], 1.0);
    assert_eq!(v["word"], "q2");
}

#[test]
fn generate_permutation_is_one_based() {
    let s = ok_stdout(&["generate", "permutation", "--n", "5", "--seed", "8"]);
    let mut vals: Vec<usize> = s.lines().map(|l| l.parse().unwrap()).collect();
    vals.sort();
    assert_eq!(vals, vec![1, 2, 3, 4, 5]);
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.mtx");
    std::fs::write(
        &bad,
        "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 1 1.0\n",
    )
    .unwrap();
    let out = run(&["certify", "--matrix", bad.to_str().unwrap(), "--ell0", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["certify", "--matrix", dir.path().join("missing.mtx").to_str().unwrap(), "--ell0", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unconverged_power_norm_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let q = generate(dir.path(), "q.mtx", &["birkhoff", "--n", "30", "--seed", "2"]);
    let out = run(&[
        "trials",
        "--matrix",
        q.to_str().unwrap(),
        "--r",
        "0.3",
        "--ell0",
        "2",
        "--trials",
        "1",
        "--method",
        "power-norm",
        "--tol",
        "1e-15",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
