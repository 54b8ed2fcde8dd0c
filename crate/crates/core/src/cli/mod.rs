//! Command-line driver: `verify`, `solve-phi` and `curvature`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on
//! usage or configuration errors.

mod config;
mod fd;
mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{resolve_phi, MetricConfig, Outputs, PhiChoice, RunConfig, SampleCounts};
pub use suite::{run_verify, Bound, Record, Report, SampleRow, SCHEMA};

use crate::error::{Error, Result};
use crate::metric::{PhiSpec, TangentSample};
use crate::ode::{self, IvpOptions, OdeConstants, OdeKind, OdeSpec};
use crate::spray::{self, CurvatureOutput, Pipeline, SCurvContext};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "finsler-ab", version, about = "Curvature checks for (alpha, beta)-metrics on Berger spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Solve a profile ODE and write the tabulated solution.
    SolvePhi(SolveArgs),
    /// Dump all curvature data at one point.
    Curvature(CurvatureArgs),
}

#[derive(Args, Debug, Clone)]
struct MetricArgs {
    /// JSON run configuration; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Metric preset.
    #[arg(long)]
    preset: Option<String>,
    /// Berger parameter.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// riemannian | randers | kropina | ode:k1 | ode:k0 | ode:km1 | file:PATH
    #[arg(long)]
    phi: Option<String>,
    /// phi'(0) for ode:* profiles.
    #[arg(long, allow_hyphen_values = true)]
    dphi0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl MetricArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.preset {
            c.metric.preset = p.clone();
        }
        if let Some(e) = self.epsilon {
            c.metric.epsilon = e;
        }
        if let Some(p) = &self.phi {
            c.phi = PhiChoice::Named(p.clone());
        }
        if let Some(d) = self.dphi0 {
            c.dphi0 = d;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    metric: MetricArgs,
    /// Number of random (x, y) samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Number of random flags.
    #[arg(long)]
    flags: Option<usize>,
    /// Tolerance applied to every upper-bound check.
    #[arg(long)]
    tol: Option<f64>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV path for per-sample residuals (defaults next to --out).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Include wall-clock runtime in the report (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// ode_star | ode_general | sphere:+1 | sphere:0 | sphere:-1
    #[arg(allow_hyphen_values = true)]
    ode: String,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    b: f64,
    /// Dimension for ode_general.
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    s0: f64,
    #[arg(long, default_value_t = 1.0)]
    phi0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    dphi0: f64,
    /// Constant set for ode_general: 1 | 2 | 3 (sphere cases), kropina, randers.
    #[arg(long, default_value = "1")]
    case: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta1: f64,
    /// Explicit constants for ode_general (override --case).
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d3: Option<f64>,
    /// delta for ode_star.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Branch sign for ode_star.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    sign: f64,
    #[arg(long, default_value_t = 1e-3)]
    margin: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Report the largest relative deviation from a known profile.
    #[arg(long, value_parser = ["randers", "kropina"])]
    compare: Option<String>,
    /// Solution JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CurvatureArgs {
    #[command(flatten)]
    metric: MetricArgs,
    /// Chart point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    /// Direction, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    y: Vec<f64>,
    /// Add finite-difference oracle columns.
    #[arg(long)]
    finite_diff: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::SolvePhi(a) => cmd_solve_phi(a),
        Command::Curvature(a) => cmd_curvature(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Error::Invalid(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    let mut cfg = a.metric.config()?;
    if let Some(n) = a.samples {
        cfg.samples.points = n;
    }
    if let Some(n) = a.flags {
        cfg.samples.flags = n;
    }
    if a.tol.is_some() {
        cfg.tol = a.tol;
    }
    if a.out.is_some() {
        cfg.outputs.json = a.out.clone();
    }
    if a.csv.is_some() {
        cfg.outputs.csv = a.csv.clone();
    }
    cfg.validate()?;
    let start = Instant::now();
    let (mut report, rows) = run_verify(&cfg)?;
    if a.timing {
        report.runtime_seconds = Some(start.elapsed().as_secs_f64());
    }
    for r in &report.records {
        let value = r.max_residual.map_or("-".to_string(), |v| format!("{v:.3e}"));
        let op = if r.bound == Bound::Upper { "<" } else { ">" };
        let tail = r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default();
        eprintln!("{} {:<28} {} {} {:.1e}{}", if r.pass { "PASS" } else { "FAIL" }, r.name, value, op, r.tolerance, tail);
    }
    write_json(&report, cfg.outputs.json.as_deref())?;
    let csv = cfg
        .outputs
        .csv
        .clone()
        .or_else(|| cfg.outputs.json.as_ref().map(|p| p.with_extension("csv")));
    if let Some(p) = csv {
        let mut f = std::fs::File::create(&p).map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))?;
        suite::write_csv(&rows, &mut f)
            .and_then(|_| f.flush())
            .map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))?;
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct SolveSummary {
    schema: &'static str,
    ode: OdeSpec,
    domain: (f64, f64),
    nodes: usize,
    max_back_substitution_residual: f64,
    min_regularity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    compare: Option<Comparison>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Comparison {
    reference: String,
    max_relative_deviation: f64,
}

fn ode_spec(a: &SolveArgs) -> Result<OdeSpec> {
    let b = a.b;
    let bad = || Error::Invalid(format!("unknown ODE '{}' (ode_star, ode_general, sphere:+1, sphere:0, sphere:-1)", a.ode));
    Ok(match a.ode.as_str() {
        "ode_star" => OdeSpec {
            kind: OdeKind::OdeStar { sign: a.sign.signum() },
            constants: OdeConstants::star(b, a.delta, a.n),
        },
        "ode_general" => {
            let mut c = match a.case.as_str() {
                "1" => OdeConstants::sphere_case(1, b, a.delta1)?,
                "2" => OdeConstants::sphere_case(0, b, a.delta1)?,
                "3" => OdeConstants::sphere_case(-1, b, a.delta1)?,
                "kropina" => OdeConstants::kropina(b, a.delta1, a.n),
                "randers" => OdeConstants::randers(b, a.delta1, a.n),
                other => return Err(Error::Invalid(format!("unknown constant set '{other}'"))),
            };
            c.n = a.n;
            if let Some(k) = a.k {
                c.k = k;
            }
            if let Some(d) = a.d2 {
                c.d2 = d;
            }
            if let Some(d) = a.d3 {
                c.d3 = d;
            }
            (c.big_k1, c.big_k2) = c.k_general();
            OdeSpec {
                kind: OdeKind::General,
                constants: c,
            }
        }
        s => {
            let k = s.strip_prefix("sphere:").ok_or_else(bad)?;
            let k: i8 = match k {
                "+1" | "1" => 1,
                "0" => 0,
                "-1" => -1,
                _ => return Err(bad()),
            };
            OdeSpec::sphere(k, b)?
        }
    })
}

fn cmd_solve_phi(a: SolveArgs) -> Result<i32> {
    let spec = ode_spec(&a)?;
    let sol = ode::solve_phi_ivp(
        spec,
        a.phi0,
        a.dphi0,
        IvpOptions {
            s0: a.s0,
            margin: a.margin,
            tol: a.tol,
        },
    )?;
    let mids: Vec<f64> = sol.s.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let residual = ode::back_substitution_residual(&sol, &mids)?;
    let mut warnings = vec![];
    for (side, why) in [("lower", &sol.meta.truncated_low), ("upper", &sol.meta.truncated_high)] {
        if let Some(w) = why {
            warnings.push(format!("{side} end truncated: {w}"));
        }
    }
    let compare = a.compare.as_deref().map(|name| {
        let reference = |s: f64| if name == "randers" { 1.0 + s } else { 1.0 / s };
        let dev = sol
            .s
            .iter()
            .zip(&sol.phi)
            .map(|(&s, &p)| (p - reference(s)).abs() / reference(s).abs())
            .fold(0.0, f64::max);
        Comparison {
            reference: name.to_string(),
            max_relative_deviation: dev,
        }
    });
    if let Some(p) = &a.out {
        write_json(&sol, Some(p))?;
    }
    write_json(
        &SolveSummary {
            schema: "finsler-ab/solve-phi/v1",
            ode: spec,
            domain: sol.domain(),
            nodes: sol.s.len(),
            max_back_substitution_residual: residual,
            min_regularity: sol.meta.min_regularity,
            compare,
            warnings,
            output: a.out.clone(),
        },
        None,
    )?;
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct FlagSample {
    u: Vec<f64>,
    k: f64,
}

#[derive(Serialize)]
struct FiniteDiff {
    spray_fd: Vec<f64>,
    max_relative_difference: f64,
}

#[derive(Serialize, Default)]
struct CurvatureDump {
    schema: &'static str,
    metric: Option<MetricConfig>,
    phi: String,
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generic: Option<CurvatureOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphabeta: Option<CurvatureOutput>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    flags: Vec<FlagSample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_curvature: Option<SCurvContext>,
    #[serde(skip_serializing_if = "Option::is_none")]
    finite_diff: Option<FiniteDiff>,
}

fn cmd_curvature(a: CurvatureArgs) -> Result<i32> {
    let cfg = a.metric.config()?;
    let m = cfg.build()?;
    if a.x.len() != 3 || a.y.len() != 3 {
        return Err(Error::Invalid("--x and --y take three components".into()));
    }
    let t = TangentSample::new(a.x.clone(), a.y.clone());
    let mut dump = CurvatureDump {
        schema: "finsler-ab/curvature/v1",
        metric: Some(cfg.metric.clone()),
        phi: m.phi.kind_name().to_string(),
        x: a.x.clone(),
        y: a.y.clone(),
        ..Default::default()
    };
    let mut body = || -> Result<()> {
        let g = spray::riemann_curvature(&m, &t, Pipeline::Generic, true)?;
        for k in 0..3 {
            let mut u = vec![0.0; 3];
            u[k] = 1.0;
            if let Ok(kv) = spray::flag_curvature_from(&g, &t.y, &u) {
                dump.flags.push(FlagSample { u, k: kv });
            }
        }
        if a.finite_diff {
            let fd = fd::spray_fd(&m, &t)?;
            let scale = g.spray.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(1e-300);
            let diff = fd.iter().zip(&g.spray).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale;
            dump.finite_diff = Some(FiniteDiff {
                spray_fd: fd,
                max_relative_difference: diff,
            });
        }
        dump.generic = Some(g);
        dump.alphabeta = Some(spray::riemann_curvature(&m, &t, Pipeline::Alphabeta, false)?);
        dump.s_curvature = Some(spray::s_curvature(&m, &t, spray::DEFAULT_FIBER_GRID, true)?);
        Ok(())
    };
    if let Err(e) = body() {
        dump.error = Some(e.to_string());
    }
    write_json(&dump, a.out.as_deref())?;
    Ok(EXIT_PASS)
}

/// Profile used when a caller only has a name.
pub fn named_phi(name: &str, b: f64, dphi0: f64) -> Result<PhiSpec> {
    resolve_phi(&PhiChoice::Named(name.to_string()), b, dphi0)
}
