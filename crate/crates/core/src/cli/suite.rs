//! Checks run by `verify`.

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::linalg;
use crate::metric::{eval_phi_jet, ABMetric, PhiSpec, TangentSample};
use crate::ode::{self, ConditionCase, OdeConstants, OdeKind, PointSamples};
use crate::riemannian::{alpha_curvature, beta_derivatives, killing_predicate, beta_s_identity_check};
use crate::s3::{structure_equation_residual, BergerSphere};
use crate::sampling::Sampler;
use crate::spray::{self, Pipeline};

pub const SCHEMA: &str = "finsler-ab/report/v1";
const DIRECTION_MARGIN: f64 = 0.05;
const TENSOR_SAMPLES: usize = 10;
const S_SAMPLES: usize = 3;
const CONDITION_POINTS: usize = 5;

/// Whether the measured value must stay below or above the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub name: String,
    /// The identity being checked.
    pub reference: String,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One per-sample residual, written to the CSV table.
#[derive(Debug, Clone)]
pub struct SampleRow {
    pub check: String,
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: &'static str,
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

struct Ctx {
    m: ABMetric<BergerSphere>,
    sphere: BergerSphere,
    samples: Vec<TangentSample>,
    flags: Vec<(TangentSample, Vec<f64>)>,
    directions: usize,
    seed: u64,
}

type Outcome = (f64, Vec<(usize, TangentSample, f64)>);
type CheckFn = Box<dyn Fn(&Ctx) -> Result<Outcome> + Send + Sync>;

struct Check {
    name: String,
    reference: &'static str,
    tolerance: f64,
    bound: Bound,
    run: CheckFn,
}

fn check(name: &str, reference: &'static str, tolerance: f64, bound: Bound, run: impl Fn(&Ctx) -> Result<Outcome> + Send + Sync + 'static) -> Check {
    Check {
        name: name.to_string(),
        reference,
        tolerance,
        bound,
        run: Box::new(run),
    }
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Maps `f` over samples, keeping per-sample rows and the maximum.
fn per_sample(samples: &[TangentSample], f: impl Fn(&TangentSample) -> Result<f64>) -> Result<Outcome> {
    let mut rows = Vec::with_capacity(samples.len());
    let mut worst = 0.0_f64;
    for (i, t) in samples.iter().enumerate() {
        let r = f(t)?;
        worst = worst.max(r);
        rows.push((i, t.clone(), r));
    }
    Ok((worst, rows))
}

fn frame_yhat(c: &Ctx, t: &TangentSample) -> Result<Vec<f64>> {
    c.sphere.frame_components(&t.x, &t.y)
}

/// Einstein constant in `Ric = 2 K F^2`, when the profile is known to give one.
fn einstein_sign(m: &ABMetric<BergerSphere>) -> Option<i8> {
    match &m.phi {
        PhiSpec::Randers => Some(1),
        PhiSpec::Riemannian if m.geometry.epsilon == 0.0 => Some(1),
        PhiSpec::Numeric(sol) => match sol.meta.ode.kind {
            OdeKind::Sphere { k_sign } => Some(k_sign),
            _ => None,
        },
        _ => None,
    }
}

fn build_checks(m: &ABMetric<BergerSphere>) -> Vec<Check> {
    use Bound::*;
    let mut v = vec![
        check("killing form", "r_ij = 0 and s_j = 0", 1e-9, Upper, |c| {
            per_sample(&c.samples, |t| {
                let k = killing_predicate(&c.m, std::slice::from_ref(t))?;
                Ok(k.max_r.max(k.max_s_vec))
            })
        }),
        check("constant length", "||beta||_alpha = b at every point", 1e-8, Upper, |c| {
            per_sample(&c.samples, |t| Ok((c.m.b_len(&t.x)? - c.sphere.b).abs()))
        }),
        check("structure equations", "d eta^1 = 2 eta^2 ^ eta^3 and cyclic", 1e-9, Upper, |c| {
            per_sample(&c.samples, |t| structure_equation_residual(&t.x))
        }),
        check("connection forms", "theta_2^1 = theta^3, theta_3^1 = -theta^2, theta_3^2 = (1-eps)/(1+eps) theta^1", 1e-8, Upper, |c| {
            per_sample(&c.samples, |t| c.sphere.connection_form_residual(&t.x))
        }),
        check("alpha Ricci", "Ric_alpha = 2 alpha^2 - 4 (b^2 alpha^2 - beta^2)", 1e-6, Upper, |c| {
            per_sample(&c.samples, |t| {
                let e = c.sphere.expected_quantities(&frame_yhat(c, t)?, None);
                Ok(rel(alpha_curvature(&c.m, t)?.ric_bar, e.ric_bar, e.alpha2))
            })
        }),
        check("s_0m s^m_0", "s_0m s^m_0 = -(b^2 alpha^2 - beta^2)", 1e-6, Upper, |c| {
            per_sample(&c.samples, |t| {
                let e = c.sphere.expected_quantities(&frame_yhat(c, t)?, None);
                Ok(rel(beta_derivatives(&c.m, t)?.s0m_sm0, e.s0m_sm0, e.alpha2))
            })
        }),
        check("s^m_0;m", "s^m_0;m = 2 beta", 1e-6, Upper, |c| {
            per_sample(&c.samples, |t| {
                let e = c.sphere.expected_quantities(&frame_yhat(c, t)?, None);
                Ok(rel(beta_derivatives(&c.m, t)?.div_s0, e.div_s0, e.alpha2.sqrt()))
            })
        }),
        check("s^i_m s^m_i", "s^i_m s^m_i = -2 b^2", 1e-6, Upper, |c| {
            per_sample(&c.samples, |t| {
                let e = c.sphere.expected_quantities(&frame_yhat(c, t)?, None);
                Ok(rel(beta_derivatives(&c.m, t)?.sisj_trace, e.sisj_trace, 1.0))
            })
        }),
        check("b^m s_jm;k + s_jm s^m_k", "b^m s_jm;k + s_jm s^m_k = 0 for Killing beta of constant length", 1e-8, Upper, |c| {
            per_sample(&c.samples, |t| Ok(beta_s_identity_check(&c.m, std::slice::from_ref(t))?.full))
        }),
        check("spray cross-pipeline", "generic spray = (alpha, beta) spray formula", 1e-7, Upper, |c| {
            per_sample(&c.samples, |t| {
                let a = spray::spray_generic(&c.m, t)?;
                let b = spray::spray_ab(&c.m, t)?;
                let scale = a.g.iter().chain(&a.gbar).fold(0.0_f64, |s, v| s.max(v.abs())).max(1e-300);
                Ok(a.g.iter().zip(&b.g).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale)
            })
        }),
        check("Ric cross-pipeline", "generic Ric = Ricci formula for Killing beta of constant length", 1e-6, Upper, |c| {
            per_sample(&c.samples, |t| {
                let g = spray::riemann_curvature(&c.m, t, Pipeline::Generic, false)?;
                let ab = spray::riemann_curvature(&c.m, t, Pipeline::Alphabeta, false)?;
                let formula = spray::ricci_killing_formula(&c.m, t)?;
                let f2 = g.f * g.f;
                Ok(rel(g.ric, formula, f2).max(rel(g.ric, ab.ric, f2)))
            })
        }),
        check("R^1_1", "R^1_1 = [1 + sQ + (b^2 - s^2) Q_s][(y^2)^2 + (y^3)^2] in the theta frame", 1e-5, Upper, |c| {
            per_sample(&c.samples, |t| {
                let yh = frame_yhat(c, t)?;
                let (_, s) = c.m.alpha_s(&t.x, &t.y)?;
                let pj = eval_phi_jet(&c.m.phi, s, c.sphere.b * c.sphere.b)?;
                let e = c.sphere.expected_quantities(&yh, Some(&pj));
                let r = spray::riemann_curvature(&c.m, t, Pipeline::Generic, false)?;
                let rf = c.sphere.frame_mixed(&t.x, &r.r)?;
                Ok(rel(rf[0][0], e.r11.unwrap_or(f64::NAN), e.alpha2))
            })
        }),
        check("Ric_ij y^i y^j = Ric", "Ricci tensor contracts to the Ricci scalar", 1e-9, Upper, |c| {
            let n = TENSOR_SAMPLES.min(c.samples.len());
            per_sample(&c.samples[..n], |t| {
                let r = spray::riemann_curvature(&c.m, t, Pipeline::Generic, true)?;
                let rt = r.ric_tensor.as_ref().ok_or(Error::DegenerateDirection)?;
                Ok(rel(linalg::bilinear(rt, &t.y, &t.y), r.ric, r.f * r.f))
            })
        }),
        check("H = 0", "H_ij = Ric_ij - 1/2 [Ric]_{y^i y^j} vanishes for Killing beta of constant length (relative to max(1, |Ric_ij|))", 1e-6, Upper, |c| {
            let n = TENSOR_SAMPLES.min(c.samples.len());
            per_sample(&c.samples[..n], |t| {
                let r = spray::riemann_curvature(&c.m, t, Pipeline::Generic, true)?;
                let ric_t = r.ric_tensor.as_ref().ok_or(Error::DegenerateDirection)?;
                Ok(linalg::max_abs(r.h.as_ref().ok_or(Error::DegenerateDirection)?) / linalg::max_abs(ric_t).max(1.0))
            })
        }),
    ];

    // the fiber integral needs F on the whole indicatrix
    let full_fiber = match &m.phi {
        PhiSpec::Kropina { .. } => false,
        PhiSpec::Numeric(sol) => sol.spans_full_interval(),
        _ => true,
    };
    if full_fiber {
        v.push(
check("S = 0", "S-curvature vanishes for Killing beta of constant length", 1e-4, Upper, |c| {
            let n = S_SAMPLES.min(c.samples.len());
            per_sample(&c.samples[..n], |t| {
                let s = spray::s_curvature(&c.m, t, spray::DEFAULT_FIBER_GRID, false)?;
                Ok(s.s.abs())
            })
        }));
    }

    if let Some(k) = einstein_sign(m) {
        let (name, tol) = match k {
            1 => ("Ric=2F^2", 1e-6),
            0 => ("Ric=0", 1e-5),
            _ => ("Ric=-2F^2", 1e-5),
        };
        let tol = if matches!(m.phi, PhiSpec::Numeric(_)) { 1e-5 } else { tol };
        v.push(check(name, "Einstein: Ric = (n-1) K F^2", tol, Upper, move |c| {
            per_sample(&c.samples, |t| {
                let r = spray::riemann_curvature(&c.m, t, Pipeline::Generic, false)?;
                let f2 = r.f * r.f;
                Ok((r.ric - 2.0 * k as f64 * f2).abs() / f2)
            })
        }));
    }

    let constant_flag = match m.phi {
        PhiSpec::Randers => true,
        PhiSpec::Riemannian => m.geometry.epsilon == 0.0,
        _ => false,
    };
    if constant_flag {
        v.push(check("flag curvature = 1", "constant flag curvature K = 1", 1e-5, Upper, |c| {
            let mut rows = Vec::with_capacity(c.flags.len());
            let mut worst = 0.0_f64;
            for (i, (t, u)) in c.flags.iter().enumerate() {
                let r = spray::riemann_curvature(&c.m, t, Pipeline::Generic, false)?;
                let k = spray::flag_curvature_from(&r, &t.y, u)?;
                worst = worst.max((k - 1.0).abs());
                rows.push((i, t.clone(), k - 1.0));
            }
            Ok((worst, rows))
        }));
    } else if matches!(m.phi, PhiSpec::Numeric(_)) {
        v.push(check("flag curvature non-constant", "standard deviation of K over random flags", 0.01, Lower, |c| {
            let mut ks = Vec::with_capacity(c.flags.len());
            let mut rows = Vec::with_capacity(c.flags.len());
            for (i, (t, u)) in c.flags.iter().enumerate() {
                let r = spray::riemann_curvature(&c.m, t, Pipeline::Generic, false)?;
                let k = spray::flag_curvature_from(&r, &t.y, u)?;
                ks.push(k);
                rows.push((i, t.clone(), k));
            }
            let mean = ks.iter().sum::<f64>() / ks.len() as f64;
            let var = ks.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / ks.len() as f64;
            Ok((var.sqrt(), rows))
        }));
    }

    if m.geometry.epsilon > 0.0 {
        v.push(check("tau = -b^2", "least-squares tau from s_0m s^m_0 = b^-2 tau (b^2 alpha^2 - beta^2)", 1e-6, Upper, |c| {
            let r = condition_report(c)?;
            let b2 = c.sphere.b * c.sphere.b;
            Ok(((r.tau_hat + b2).abs() / b2, vec![]))
        }));
        v.push(check("Einstein conditions", "Ric_alpha, s_0m s^m_0 and s^m_0;m in terms of tau, K1 = -b^-2, K2 = 2 b^-2", 1e-6, Upper, |c| {
            let r = condition_report(c)?;
            Ok((r.residual_ric_bar.max(r.residual_tau).max(r.residual_divergence).max(r.tau_spread), vec![]))
        }));
    }
    v
}

fn condition_report(c: &Ctx) -> Result<ode::ConditionReport> {
    let mut s = Sampler::new(c.seed.wrapping_add(2));
    let dirs = c.directions.max(ode::MIN_DIRECTIONS);
    let points = (0..CONDITION_POINTS)
        .map(|_| {
            let x = s.point_in_ball(3, crate::sampling::CHART_RADIUS);
            let ys = (0..dirs).map(|_| s.unit_vector(3)).collect();
            PointSamples { x, ys }
        })
        .collect::<Vec<_>>();
    let consts = OdeConstants::sphere_case(1, c.sphere.b, 0.0)?;
    ode::einstein_condition_check(&c.m, ConditionCase::Proportional, &consts, &points)
}

/// Runs every applicable check. Numerical failures are recorded per check.
pub fn run_verify(cfg: &RunConfig) -> Result<(Report, Vec<SampleRow>)> {
    let m = cfg.build()?;
    let sphere = m.geometry;
    let checks = build_checks(&m);
    let (samples, flags) = {
        let mut s = Sampler::new(cfg.seed);
        let samples = s.tangent_samples(&m, cfg.samples.points, DIRECTION_MARGIN);
        let mut fs = Sampler::new(cfg.seed.wrapping_add(1));
        let flags: Result<Vec<_>> = (0..cfg.samples.flags)
            .map(|_| {
                let x = fs.point_in_ball(3, crate::sampling::CHART_RADIUS);
                let (y, u) = fs.flag(&m, &x, DIRECTION_MARGIN)?;
                Ok((TangentSample::new(x, y), u))
            })
            .collect();
        (samples, flags)
    };
    let (samples, flags) = match (samples, flags) {
        (Ok(s), Ok(f)) => (s, f),
        (Err(e), _) | (_, Err(e)) => return Ok((error_report(cfg, &checks, &e), vec![])),
    };
    let ctx = Ctx {
        m,
        sphere,
        samples,
        flags,
        directions: cfg.samples.directions,
        seed: cfg.seed,
    };
    let results: Vec<(Record, Vec<SampleRow>)> = checks
        .par_iter()
        .map(|ch| {
            let tolerance = tolerance_for(cfg, ch);
            match (ch.run)(&ctx) {
                Ok((value, rows)) => {
                    let pass = match ch.bound {
                        Bound::Upper => value < tolerance,
                        Bound::Lower => value > tolerance,
                    };
                    let rows = rows
                        .into_iter()
                        .map(|(index, t, residual)| SampleRow {
                            check: ch.name.clone(),
                            index,
                            x: t.x,
                            y: t.y,
                            residual,
                        })
                        .collect();
                    (record(ch, tolerance, Some(value), pass, None), rows)
                }
                Err(e) => (record(ch, tolerance, None, false, Some(e.to_string())), vec![]),
            }
        })
        .collect();
    let mut records = Vec::with_capacity(results.len());
    let mut rows = Vec::new();
    for (r, mut rs) in results {
        records.push(r);
        rows.append(&mut rs);
    }
    let pass = records.iter().all(|r| r.pass);
    Ok((
        Report {
            schema: SCHEMA,
            command: "verify",
            config: cfg.clone(),
            records,
            pass,
            runtime_seconds: None,
        },
        rows,
    ))
}

fn tolerance_for(cfg: &RunConfig, ch: &Check) -> f64 {
    if let Some(t) = cfg.tolerances.get(&ch.name) {
        return *t;
    }
    match (ch.bound, cfg.tol) {
        (Bound::Upper, Some(t)) => t,
        _ => ch.tolerance,
    }
}

fn record(ch: &Check, tolerance: f64, value: Option<f64>, pass: bool, error: Option<String>) -> Record {
    Record {
        name: ch.name.clone(),
        reference: ch.reference.to_string(),
        max_residual: value,
        tolerance,
        bound: ch.bound,
        pass,
        error,
    }
}

fn error_report(cfg: &RunConfig, checks: &[Check], e: &Error) -> Report {
    let records = checks
        .iter()
        .map(|ch| record(ch, tolerance_for(cfg, ch), None, false, Some(format!("sampling failed: {e}"))))
        .collect();
    Report {
        schema: SCHEMA,
        command: "verify",
        config: cfg.clone(),
        records,
        pass: false,
        runtime_seconds: None,
    }
}

pub fn write_csv(rows: &[SampleRow], out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "check,index,x1,x2,x3,y1,y2,y3,residual")?;
    for r in rows {
        let xs: Vec<String> = r.x.iter().chain(&r.y).map(|v| format!("{v:e}")).collect();
        writeln!(out, "\"{}\",{},{},{:e}", r.check, r.index, xs.join(","), r.residual)?;
    }
    Ok(())
}
