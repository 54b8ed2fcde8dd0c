use std::path::Path;

use finsler_ab::cli::run;
use serde_json::Value;

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("finsler-ab").chain(args.iter().copied()))
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn verify(dir: &Path, phi: &str, extra: &[&str]) -> (i32, Value) {
    let out = dir.join(format!("{}.json", phi.replace([':', '/'], "_")));
    let out_s = out.to_str().unwrap();
    let mut args = vec!["verify", "--phi", phi, "--samples", "4", "--flags", "20", "--out", out_s];
    args.extend_from_slice(extra);
    let code = cli(&args);
    (code, read(&out))
}

#[test]
fn verify_passes_for_einstein_profiles() {
    let dir = tempfile::tempdir().unwrap();
    for phi in ["randers", "ode:k0", "ode:k1"] {
        let (code, rep) = verify(dir.path(), phi, &[]);
        assert_eq!(code, 0, "{phi}: {rep:#}");
        assert_eq!(rep["schema"], "finsler-ab/report/v1");
        assert_eq!(rep["pass"], true);
        assert!(rep["records"].as_array().unwrap().len() > 10);
        assert!(rep.get("runtime_seconds").is_none());
    }
}

#[test]
fn verify_fails_with_impossible_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = verify(dir.path(), "randers", &["--tol", "1e-15"]);
    assert_eq!(code, 1);
    assert_eq!(rep["pass"], false);
    let csv = std::fs::read_to_string(dir.path().join("randers.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cli(&["verify", "--preset", "torus", "--samples", "1"]), 2);
    assert_eq!(cli(&["verify", "--phi", "nonsense"]), 2);
    assert_eq!(cli(&["solve-phi", "sphere:7"]), 2);
    assert_eq!(cli(&["frobnicate"]), 2);
}

#[test]
fn reports_are_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ode_km1.json");
    verify(dir.path(), "ode:km1", &["--seed", "9"]);
    let first = std::fs::read(&path).unwrap();
    verify(dir.path(), "ode:km1", &["--seed", "9"]);
    assert_eq!(first, std::fs::read(&path).unwrap());
}

#[test]
fn solved_profile_file_feeds_verify() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("phi.json");
    let code = cli(&["solve-phi", "sphere:0", "--dphi0", "0.3", "--out", sol.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(read(&sol)["s"].as_array().unwrap().len() > 50);
    let spec = format!("file:{}", sol.display());
    let (code, rep) = verify(dir.path(), &spec, &[]);
    assert_eq!(code, 0, "{rep:#}");
    let names: Vec<&str> = rep["records"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"Ric=0"), "{names:?}");
}

#[test]
fn solve_phi_compares_against_randers() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("r.json");
    assert_eq!(cli(&["solve-phi", "sphere:+1", "--dphi0", "1", "--compare", "randers", "--out", sol.to_str().unwrap()]), 0);
    let back: finsler_ab::ode::PhiSolution = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    for (s, p) in back.s.iter().zip(&back.phi) {
        assert!((p - (1.0 + s)).abs() < 1e-8);
    }
}

#[test]
fn curvature_dump_reports_domain_error_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let code = cli(&["curvature", "--phi", "kropina", "--x", "0,0,0", "--y", "0,1,0", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let dump = read(&out);
    assert_eq!(dump["schema"], "finsler-ab/curvature/v1");
    assert!(dump["error"].as_str().is_some());
    assert!(dump.get("generic").is_none());
}

#[test]
fn curvature_finite_difference_column_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let code = cli(&[
        "curvature", "--phi", "randers", "--epsilon", "0.5", "--x", "0.1,-0.2,0.3", "--y", "0.4,1,-0.3", "--finite-diff", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let dump = read(&out);
    assert!(dump["finite_diff"]["max_relative_difference"].as_f64().unwrap() < 1e-6);
    assert!(dump["generic"].is_object() && dump["alphabeta"].is_object());
}
