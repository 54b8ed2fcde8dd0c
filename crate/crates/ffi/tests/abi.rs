use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use finsler_ab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = fab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn metric(phi: &str, eps: f64) -> *mut FabMetric {
    let mut m = ptr::null_mut();
    let st = unsafe { fab_metric_new(c("s3-berger").as_ptr(), eps, c(phi).as_ptr(), 0.3, &mut m) };
    assert_eq!(st, FabStatus::Ok);
    m
}

const X: [f64; 3] = [0.1, -0.2, 0.3];
const Y: [f64; 3] = [0.4, 1.0, -0.3];

#[test]
fn randers_metric_is_einstein_through_the_abi() {
    let m = metric("randers", 0.5);
    let (mut f, mut ric, mut k) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(fab_finsler(m, X.as_ptr(), Y.as_ptr(), &mut f), FabStatus::Ok);
        assert_eq!(fab_ricci(m, X.as_ptr(), Y.as_ptr(), &mut ric), FabStatus::Ok);
        let u = [0.0, 0.2, 1.0];
        assert_eq!(fab_flag_curvature(m, X.as_ptr(), Y.as_ptr(), u.as_ptr(), &mut k), FabStatus::Ok);
        fab_metric_free(m);
    }
    assert!(f > 0.0);
    assert!((ric - 2.0 * f * f).abs() < 1e-9 * f * f);
    assert!((k - 1.0).abs() < 1e-9);
    assert!(fab_last_error().is_null());
}

#[test]
fn both_spray_routes_agree() {
    let m = metric("ode:k0", 1.0);
    let (mut g1, mut g2) = ([0.0; 3], [0.0; 3]);
    unsafe {
        assert_eq!(fab_spray(m, X.as_ptr(), Y.as_ptr(), false, g1.as_mut_ptr()), FabStatus::Ok);
        assert_eq!(fab_spray(m, X.as_ptr(), Y.as_ptr(), true, g2.as_mut_ptr()), FabStatus::Ok);
        fab_metric_free(m);
    }
    for i in 0..3 {
        assert!((g1[i] - g2[i]).abs() < 1e-10 * g1[i].abs().max(1.0));
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut m = ptr::null_mut();
    unsafe {
        let st = fab_metric_new(c("torus").as_ptr(), 1.0, c("randers").as_ptr(), 0.3, &mut m);
        assert_eq!(st, FabStatus::InvalidArgument);
        assert!(last_error().contains("torus"));
        assert!(m.is_null());

        assert_eq!(fab_metric_new(ptr::null(), 1.0, c("randers").as_ptr(), 0.3, &mut m), FabStatus::NullPointer);

        let k = metric("kropina", 1.0);
        let mut f = 0.0;
        let y = [0.0, 1.0, 0.0];
        assert_eq!(fab_finsler(k, [0.0; 3].as_ptr(), y.as_ptr(), &mut f), FabStatus::Domain);
        assert_eq!(fab_finsler(k, [0.0; 3].as_ptr(), ptr::null(), &mut f), FabStatus::NullPointer);
        fab_metric_free(k);
        assert_eq!(fab_ricci(ptr::null(), X.as_ptr(), Y.as_ptr(), &mut f), FabStatus::NullPointer);
    }
}

#[test]
fn verify_returns_report_json() {
    let cfg = c(r#"{"metric": {"preset": "s3-berger", "epsilon": 1.0}, "phi": "randers", "samples": {"points": 3, "directions": 12, "flags": 10}}"#);
    let (mut passed, mut report) = (false, ptr::null_mut());
    unsafe {
        assert_eq!(fab_verify(cfg.as_ptr(), &mut passed, &mut report), FabStatus::Ok);
        let text = CStr::from_ptr(report).to_str().unwrap().to_string();
        fab_string_free(report);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], "finsler-ab/report/v1");
        assert_eq!(v["pass"], true);
    }
    assert!(passed);

    let bad = c(r#"{"metric": {"preset": "s3-berger", "epsilon": 1.0}, "phi": "randers", "bogus": 1}"#);
    unsafe {
        assert_eq!(fab_verify(bad.as_ptr(), &mut passed, &mut report), FabStatus::InvalidArgument);
    }
    assert!(last_error().contains("bogus"));
}

#[test]
fn solved_profile_builds_a_metric() {
    let mut json = ptr::null_mut();
    let b = std::f64::consts::FRAC_1_SQRT_2;
    unsafe {
        assert_eq!(fab_solve_sphere_phi(-1, b, 1.0, 0.3, &mut json), FabStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_string();
        fab_string_free(json);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.json");
        std::fs::write(&path, text).unwrap();
        let m = metric(&format!("file:{}", path.display()), 1.0);
        let (mut f, mut ric) = (0.0, 0.0);
        assert_eq!(fab_finsler(m, X.as_ptr(), Y.as_ptr(), &mut f), FabStatus::Ok);
        assert_eq!(fab_ricci(m, X.as_ptr(), Y.as_ptr(), &mut ric), FabStatus::Ok);
        fab_metric_free(m);
        assert!((ric + 2.0 * f * f).abs() < 1e-5 * f * f);

        assert_eq!(fab_solve_sphere_phi(3, b, 1.0, 0.3, &mut json), FabStatus::InvalidArgument);
    }
}

fn target_dir() -> PathBuf {
    // tests/ binaries live in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header_dir = crate_dir.join("include");
    assert!(header_dir.join("finsler_ab.h").exists());
    let lib = target_dir().join("libfinsler_ab_ffi.a");
    if !have_cc() || !lib.exists() {
        eprintln!("skipping C link test: cc or {} missing", lib.display());
        return;
    }
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 0.1.0"));
}
