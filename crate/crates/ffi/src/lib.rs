//! C ABI over `finsler-ab`.
//!
//! Every function returns a [`FabStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read with
//! [`fab_last_error`]. Strings handed out by the library are released with
//! [`fab_string_free`], metric handles with [`fab_metric_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finsler_ab::cli::{run_verify, PhiChoice, RunConfig};
use finsler_ab::metric::{ABMetric, TangentSample};
use finsler_ab::ode::{solve_phi_ivp, IvpOptions, OdeSpec};
use finsler_ab::s3::BergerSphere;
use finsler_ab::spray::{self, Pipeline};
use finsler_ab::Error;

/// Dimension of every metric the library builds.
pub const FAB_DIM: usize = 3;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// `(x, y)` or `s` outside where the metric or profile is defined.
    Domain = 3,
    /// Degenerate metric, flag or ODE coefficient.
    Numerical = 4,
    Panic = 5,
}

/// Opaque metric handle.
pub struct FabMetric {
    inner: ABMetric<BergerSphere>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Invalid(_) => FabStatus::InvalidArgument,
            Error::DegenerateMetric { .. } | Error::DegenerateFlag { .. } | Error::DegenerateOde { .. } => FabStatus::Numerical,
            _ => FabStatus::Domain,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(FabStatus::InvalidArgument, msg.into())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FabStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FabStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            FabStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(FabStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn vec_arg(p: *const f64, what: &str) -> Result<Vec<f64>, Failure> {
    if p.is_null() {
        return Err(Failure(FabStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, FAB_DIM).to_vec())
}

unsafe fn metric_arg<'a>(m: *const FabMetric) -> Result<&'a ABMetric<BergerSphere>, Failure> {
    m.as_ref()
        .map(|m| &m.inner)
        .ok_or_else(|| Failure(FabStatus::NullPointer, "metric handle is null".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(FabStatus::NullPointer, format!("{what} is null")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

unsafe fn sample(x: *const f64, y: *const f64) -> Result<TangentSample, Failure> {
    Ok(TangentSample::new(vec_arg(x, "x")?, vec_arg(y, "y")?))
}

fn publish_metric(cfg: &RunConfig, out: &mut *mut FabMetric) -> Result<(), Failure> {
    cfg.validate()?;
    let inner = cfg.build()?;
    *out = Box::into_raw(Box::new(FabMetric { inner }));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn fab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a metric from a preset name (`"s3-berger"`), its parameter, and a
/// profile name (`riemannian`, `randers`, `kropina`, `ode:k1`, `ode:k0`,
/// `ode:km1`, `file:PATH`). `dphi0` is the slope used by `ode:*` profiles.
///
/// # Safety
/// `preset` and `phi` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fab_metric_new(
    preset: *const c_char,
    epsilon: f64,
    phi: *const c_char,
    dphi0: f64,
    out: *mut *mut FabMetric,
) -> FabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let mut cfg = RunConfig::default();
        cfg.metric.preset = str_arg(preset, "preset")?.to_string();
        cfg.metric.epsilon = epsilon;
        cfg.phi = PhiChoice::Named(str_arg(phi, "phi")?.to_string());
        cfg.dphi0 = dphi0;
        publish_metric(&cfg, out)
    })
}

/// Builds a metric from a JSON run configuration (same format as the CLI's
/// `--config`).
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fab_metric_from_config(config_json: *const c_char, out: *mut *mut FabMetric) -> FabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg: RunConfig = serde_json::from_str(str_arg(config_json, "config_json")?).map_err(|e| invalid(e.to_string()))?;
        publish_metric(&cfg, out)
    })
}

/// # Safety
/// `m` must come from `fab_metric_new`/`fab_metric_from_config` and not be
/// used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fab_metric_free(m: *mut FabMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `F(x, y)`. `x` and `y` point to `FAB_DIM` doubles.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn fab_finsler(m: *const FabMetric, x: *const f64, y: *const f64, out: *mut f64) -> FabStatus {
    guard(|| {
        let (m, out) = (metric_arg(m)?, out_arg(out, "out")?);
        *out = finsler_ab::metric::eval_f(m, &sample(x, y)?)?;
        Ok(())
    })
}

/// Spray coefficients `G^i(x, y)` into `out[0..FAB_DIM]`. `alphabeta`
/// selects the closed-form route instead of differentiating `F^2`.
///
/// # Safety
/// Pointers must be valid for `FAB_DIM` doubles.
#[no_mangle]
pub unsafe extern "C" fn fab_spray(m: *const FabMetric, x: *const f64, y: *const f64, alphabeta: bool, out: *mut f64) -> FabStatus {
    guard(|| {
        let m = metric_arg(m)?;
        if out.is_null() {
            return Err(Failure(FabStatus::NullPointer, "out is null".into()));
        }
        let t = sample(x, y)?;
        let s = if alphabeta { spray::spray_ab(m, &t)? } else { spray::spray_generic(m, &t)? };
        std::slice::from_raw_parts_mut(out, FAB_DIM).copy_from_slice(&s.g);
        Ok(())
    })
}

/// Ricci scalar `Ric(x, y)` (degree two in `y`) from the generic pipeline.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn fab_ricci(m: *const FabMetric, x: *const f64, y: *const f64, out: *mut f64) -> FabStatus {
    guard(|| {
        let (m, out) = (metric_arg(m)?, out_arg(out, "out")?);
        *out = spray::riemann_curvature(m, &sample(x, y)?, Pipeline::Generic, false)?.ric;
        Ok(())
    })
}

/// Flag curvature `K(x, y, u)`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn fab_flag_curvature(
    m: *const FabMetric,
    x: *const f64,
    y: *const f64,
    u: *const f64,
    out: *mut f64,
) -> FabStatus {
    guard(|| {
        let (m, out) = (metric_arg(m)?, out_arg(out, "out")?);
        *out = spray::flag_curvature(m, &sample(x, y)?, &vec_arg(u, "u")?)?;
        Ok(())
    })
}

/// Runs the verification suite for a JSON run configuration. `passed`
/// receives the overall verdict and `report_json` the report, to be freed
/// with `fab_string_free`. A failing check is not an error status.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn fab_verify(config_json: *const c_char, passed: *mut bool, report_json: *mut *mut c_char) -> FabStatus {
    guard(|| {
        let passed = out_arg(passed, "passed")?;
        let report_json = out_arg(report_json, "report_json")?;
        let cfg: RunConfig = serde_json::from_str(str_arg(config_json, "config_json")?).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        let (report, _) = run_verify(&cfg)?;
        *passed = report.pass;
        *report_json = into_c_string(serde_json::to_string(&report).map_err(|e| invalid(e.to_string()))?);
        Ok(())
    })
}

/// Solves the sphere profile equation with Einstein sign `k_sign` (+1, 0, -1)
/// from `phi(0) = phi0`, `phi'(0) = dphi0`. The tabulated solution goes to
/// `solution_json` (loadable as `file:PATH` once written to disk).
///
/// # Safety
/// `solution_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fab_solve_sphere_phi(
    k_sign: i32,
    b: f64,
    phi0: f64,
    dphi0: f64,
    solution_json: *mut *mut c_char,
) -> FabStatus {
    guard(|| {
        let out = out_arg(solution_json, "solution_json")?;
        let k = match k_sign {
            -1 | 0 | 1 => k_sign as i8,
            _ => return Err(invalid(format!("k_sign must be -1, 0 or 1, got {k_sign}"))),
        };
        let sol = solve_phi_ivp(OdeSpec::sphere(k, b)?, phi0, dphi0, IvpOptions::default())?;
        *out = into_c_string(serde_json::to_string(&sol).map_err(|e| invalid(e.to_string()))?);
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
