//! The ODE family for `phi(s)` that makes `F = alpha phi(beta / alpha)`
//! Einstein, its numerical solution, closed-form checks, and the checker
//! for the conditions on `(alpha, beta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Scalar;
use crate::metric::{eval_phi_jet, ABMetric, ChartGeometry, PhiFunction, PhiJet, PhiSpec, SINGULAR_TOL};
use crate::riemannian::{alpha_curvature, beta_derivatives};
use crate::rk;
use crate::taylor::Series;

/// Which member of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum OdeKind {
    /// `Q = -s/b^2 + sign sqrt(delta) sqrt(1 - s^2/b^2)`
    OdeStar { sign: f64 },
    /// The general equation with constants `k, delta_1..3` in dimension `n`.
    General,
    /// The `n = 3` sphere specialization with Einstein sign `K` in {1, 0, -1}.
    Sphere { k_sign: i8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeConstants {
    pub b: f64,
    pub delta: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub k: f64,
    pub n: usize,
    pub big_k1: f64,
    pub big_k2: f64,
    pub big_k3: f64,
    /// Einstein constant carried with the constants (`k tau` convention).
    pub big_k: f64,
}

impl OdeConstants {
    /// General constants; `K1, K2` are filled from `k, delta_i`.
    pub fn general(b: f64, n: usize, k: f64, d1: f64, d2: f64, d3: f64) -> Self {
        let mut c = Self {
            b,
            delta: 0.0,
            d1,
            d2,
            d3,
            k,
            n,
            big_k1: 0.0,
            big_k2: 0.0,
            big_k3: 0.0,
            big_k: 0.0,
        };
        (c.big_k1, c.big_k2) = c.k_general();
        c
    }

    /// Constants for the `(ODE*)` branch; `K1..K3` are filled from `b, delta`.
    pub fn star(b: f64, delta: f64, n: usize) -> Self {
        let mut c = Self::general(b, n, 0.0, 0.0, 0.0, 0.0);
        c.delta = delta;
        (c.big_k1, c.big_k2, c.big_k3) = c.k_star();
        c
    }

    /// `K1 = -b^-2, K2 = b^-2 (b^-2 + delta), K3 = -2 (b^-2 + delta)`
    pub fn k_star(&self) -> (f64, f64, f64) {
        let ib2 = 1.0 / (self.b * self.b);
        (-ib2, ib2 * (ib2 + self.delta), -2.0 * (ib2 + self.delta))
    }

    /// `K1 = delta_1 k + delta_2, K2 = b^-2 [(1 - delta_1) k + delta_3 - delta_2]`
    pub fn k_general(&self) -> (f64, f64) {
        let ib2 = 1.0 / (self.b * self.b);
        (
            self.d1 * self.k + self.d2,
            ib2 * ((1.0 - self.d1) * self.k + self.d3 - self.d2),
        )
    }

    /// The three sphere cases (`K = +1, 0, -1`), `n = 3`.
    ///
    /// For `K = -1` the constant `delta_2 = -b^-2 (1 + delta_1)` is used; with
    /// `-b^-2 (1 - delta_1)` the general equation reduces to the sphere form
    /// only when `delta_1 = 0`.
    pub fn sphere_case(k_sign: i8, b: f64, d1: f64) -> Result<Self> {
        let ib2 = 1.0 / (b * b);
        let (k, d2, d3) = match k_sign {
            1 => (-ib2, -ib2 * (1.0 - d1), 2.0),
            0 => (0.0, -ib2, 2.0 - ib2),
            -1 => (ib2, -ib2 * (1.0 + d1), 2.0 - 2.0 * ib2),
            other => return Err(Error::Invalid(format!("sphere Einstein sign must be 1, 0 or -1, got {other}"))),
        };
        let mut c = Self::general(b, 3, k, d1, d2, d3);
        // tau = -b^2 on Berger spheres
        c.big_k = k * -(b * b);
        Ok(c)
    }

    /// `k = -1/4, delta_2 = delta_1/4 - 1/b^2, delta_3 = 1/4 - 1/b^2`
    pub fn kropina(b: f64, d1: f64, n: usize) -> Self {
        let ib2 = 1.0 / (b * b);
        Self::general(b, n, -0.25, d1, d1 / 4.0 - ib2, 0.25 - ib2)
    }

    /// `delta_2 = -b^-2 (1 - delta_1), delta_3 = (n+1)/(n-1), k = -b^-2`
    pub fn randers(b: f64, d1: f64, n: usize) -> Self {
        let ib2 = 1.0 / (b * b);
        Self::general(b, n, -ib2, d1, -ib2 * (1.0 - d1), (n as f64 + 1.0) / (n as f64 - 1.0))
    }
}

/// `min over signs |Q - (-s/b^2 +- sqrt(delta) sqrt(1 - s^2/b^2))|`
pub fn residual_ode_star(q: f64, s: f64, c: &OdeConstants) -> f64 {
    let ib2 = 1.0 / (c.b * c.b);
    let root = c.delta.sqrt() * (1.0 - ib2 * s * s).max(0.0).sqrt();
    let base = -ib2 * s;
    (q - base - root).abs().min((q - base + root).abs())
}

/// Left side minus right side of the general equation.
pub fn residual_ode(pj: &PhiJet, c: &OdeConstants) -> f64 {
    let (s, q, qs, phi) = (pj.s, pj.q, pj.q_s, pj.phi);
    let b2 = c.b * c.b;
    let w = b2 - s * s;
    let n1 = c.n as f64 - 1.0;
    w * (2.0 * (1.0 + s * q) * qs - 2.0 * q * q) / n1 - (2.0 * s * q + b2 * q * q)
        + c.k * (c.d1 * s * s + w)
        + c.d2 * s * s
        + w * c.d3
        - c.k * b2 * phi * phi
}

/// Residual of the sphere specialization with `K` in {1, 0, -1}.
pub fn residual_ode_sphere(pj: &PhiJet, k_sign: i8, b: f64) -> f64 {
    let (s, q, qs, phi) = (pj.s, pj.q, pj.q_s, pj.phi);
    let b2 = b * b;
    (b2 - s * s) * ((1.0 + s * q) * qs - q * q + 2.0) - (2.0 * s * q + b2 * q * q + 1.0) + k_sign as f64 * phi * phi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSpec {
    pub kind: OdeKind,
    pub constants: OdeConstants,
}

impl OdeSpec {
    pub fn sphere(k_sign: i8, b: f64) -> Result<Self> {
        Ok(Self {
            kind: OdeKind::Sphere { k_sign },
            constants: OdeConstants::sphere_case(k_sign, b, 0.0)?,
        })
    }

    /// `Q` prescribed by `(ODE*)` at `s`.
    fn q_star<T: Scalar>(&self, s: &T, sign: f64) -> Result<(T, T)> {
        let c = &self.constants;
        let ib2 = 1.0 / (c.b * c.b);
        let root = (T::cst(1.0) - s.square() * ib2).sqrt()?;
        let sd = c.delta.sqrt() * sign;
        let q = root.scale(sd) - s.scale(ib2);
        let q_s = -(s.checked_div(&root)?.scale(sd * ib2)) - ib2;
        Ok((q, q_s))
    }

    /// `phi''` solved from the equation at `(s, phi, phi')`.
    pub fn second_derivative<T: Scalar>(&self, s: &T, phi: &T, dphi: &T) -> Result<T> {
        let c = &self.constants;
        let sv = s.re();
        let d = phi.sub_ref(&s.mul_ref(dphi));
        if d.re().abs() < SINGULAR_TOL {
            return Err(Error::SingularQ { s: sv });
        }
        if phi.re() <= 0.0 {
            return Err(Error::PhiDomain { kind: "numeric", s: sv });
        }
        let b2 = c.b * c.b;
        let q_s = match self.kind {
            OdeKind::OdeStar { sign } => self.q_star(s, sign)?.1,
            OdeKind::General | OdeKind::Sphere { .. } => {
                let q = dphi.checked_div(&d)?;
                let w = T::cst(b2) - s.square();
                let sq = s.mul_ref(&q);
                let q2 = q.square();
                let (coef, rest) = match self.kind {
                    OdeKind::Sphere { k_sign } => {
                        let coef = w.mul_ref(&(sq.clone() + 1.0));
                        let rest = w.mul_ref(&(T::cst(2.0) - q2.clone())) - (sq.scale(2.0) + q2.scale(b2) + 1.0)
                            + phi.square().scale(k_sign as f64);
                        (coef, rest)
                    }
                    _ => {
                        let n1 = c.n as f64 - 1.0;
                        let coef = w.mul_ref(&(sq.clone() + 1.0)).scale(2.0 / n1);
                        let s2 = s.square();
                        let rest = -(w.mul_ref(&q2).scale(2.0 / n1)) - (sq.scale(2.0) + q2.scale(b2))
                            + (s2.scale(c.d1) + w.clone()).scale(c.k)
                            + s2.scale(c.d2)
                            + w.scale(c.d3)
                            - phi.square().scale(c.k * b2);
                        (coef, rest)
                    }
                };
                if coef.re().abs() < SINGULAR_TOL {
                    return Err(Error::DegenerateOde { s: sv });
                }
                -(rest.checked_div(&coef)?)
            }
        };
        Ok(q_s.mul_ref(&d.square()).checked_div(phi)?)
    }

    /// Residual of the equation for a profile record at `s`.
    pub fn residual(&self, pj: &PhiJet) -> f64 {
        match self.kind {
            OdeKind::OdeStar { .. } => residual_ode_star(pj.q, pj.s, &self.constants),
            OdeKind::General => residual_ode(pj, &self.constants),
            OdeKind::Sphere { k_sign } => residual_ode_sphere(pj, k_sign, self.constants.b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionMeta {
    pub ode: OdeSpec,
    pub s0: f64,
    pub phi0: f64,
    pub dphi0: f64,
    pub tol: f64,
    pub margin: f64,
    /// Why the backward run stopped short of `-b + margin`, if it did.
    pub truncated_low: Option<String>,
    /// Why the forward run stopped short of `b - margin`, if it did.
    pub truncated_high: Option<String>,
    /// Minimum of `phi - s phi' + (b^2 - s^2) phi''` over the nodes.
    pub min_regularity: f64,
}

/// Tabulated solution with quintic Hermite interpolation between nodes.
/// Jet evaluation re-expands the equation as a Taylor series at the
/// evaluation point, so derivatives of every order satisfy it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiSolution {
    pub meta: SolutionMeta,
    pub s: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub ddphi: Vec<f64>,
}

impl PhiSolution {
    pub fn domain(&self) -> (f64, f64) {
        (self.s[0], *self.s.last().unwrap())
    }

    pub fn contains(&self, s: f64) -> bool {
        let (lo, hi) = self.domain();
        s >= lo && s <= hi
    }

    /// `(phi, phi', phi'')` of the interpolant.
    pub fn interpolate(&self, s: f64) -> Result<[f64; 3]> {
        if !self.contains(s) {
            return Err(Error::PhiDomain { kind: "numeric", s });
        }
        let i = match self.s.partition_point(|&v| v <= s) {
            0 => 0,
            k => (k - 1).min(self.s.len() - 2),
        };
        let h = self.s[i + 1] - self.s[i];
        let t = (s - self.s[i]) / h;
        let c0 = self.phi[i];
        let c1 = h * self.dphi[i];
        let c2 = 0.5 * h * h * self.ddphi[i];
        let p = self.phi[i + 1] - (c0 + c1 + c2);
        let pd = h * self.dphi[i + 1] - (c1 + 2.0 * c2);
        let pdd = h * h * self.ddphi[i + 1] - 2.0 * c2;
        let c3 = 10.0 * p - 4.0 * pd + 0.5 * pdd;
        let c4 = -15.0 * p + 7.0 * pd - pdd;
        let c5 = 6.0 * p - 3.0 * pd + 0.5 * pdd;
        let v = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        let dv = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
        let ddv = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
        Ok([v, dv / h, ddv / (h * h)])
    }

    /// Taylor coefficients of the local solution through the interpolated
    /// `(phi, phi')` at `s0`, up to `order`.
    pub fn local_series(&self, s0: f64, order: usize) -> Result<Vec<f64>> {
        let [p0, d0, _] = self.interpolate(s0)?;
        let mut c = vec![0.0; order.max(1) + 1];
        c[0] = p0;
        c[1] = d0;
        for k in 2..=order {
            // coefficient k-2 of phi'' needs phi up to order k-1
            let len = k - 1;
            let phi = Series::new(c[..len].to_vec());
            let dphi = Series::new((1..=len).map(|j| j as f64 * c[j]).collect());
            let t = Series::variable(s0, len - 1);
            let f = self.meta.ode.second_derivative(&t, &phi, &dphi)?;
            c[k] = f.coeff(k - 2) / (k * (k - 1)) as f64;
        }
        Ok(c)
    }

    /// True when neither end was cut short, so the profile spans
    /// `(-b + margin, b - margin)`.
    pub fn spans_full_interval(&self) -> bool {
        self.meta.truncated_low.is_none() && self.meta.truncated_high.is_none()
    }

    /// Value with a second-order Taylor continuation past the ends.
    pub fn eval_extended(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let (i, e) = if s < lo {
            (0, lo)
        } else if s > hi {
            (self.s.len() - 1, hi)
        } else {
            return Ok(self.interpolate(s)?[0]);
        };
        let d = s - e;
        Ok(self.phi[i] + d * self.dphi[i] + 0.5 * d * d * self.ddphi[i])
    }

    pub fn eval_scalar<T: Scalar>(&self, s: &T) -> Result<T> {
        let s0 = s.re();
        if T::ORDER == 0 {
            return Ok(T::cst(self.interpolate(s0)?[0]));
        }
        let c = self.local_series(s0, T::ORDER)?;
        let ds = s.clone() - s0;
        let mut acc = T::cst(c[c.len() - 1]);
        for &ck in c.iter().rev().skip(1) {
            acc = acc.mul_ref(&ds) + ck;
        }
        Ok(acc)
    }
}

impl PhiFunction for PhiSolution {
    fn phi<T: Scalar>(&self, s: &T) -> Result<T> {
        self.eval_scalar(s)
    }
}

/// Integration settings for [`solve_phi_ivp`].
#[derive(Debug, Clone, Copy)]
pub struct IvpOptions {
    pub s0: f64,
    pub margin: f64,
    pub tol: f64,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            s0: 0.0,
            margin: 1e-3,
            tol: 1e-10,
        }
    }
}

const PHI_BLOWUP: f64 = 1e6;

/// Integrates `phi'' = f(s, phi, phi')` from `s0` towards both ends of
/// `(-b + margin, b - margin)`. For `(ODE*)` the slope is fixed by the
/// equation, and `dphi0` is ignored.
pub fn solve_phi_ivp(ode: OdeSpec, phi0: f64, dphi0: f64, opts: IvpOptions) -> Result<PhiSolution> {
    let b = ode.constants.b;
    if !(phi0 > 0.0) {
        return Err(Error::Invalid(format!("phi(s0) must be positive, got {phi0}")));
    }
    if !(b > 0.0) || opts.s0.abs() >= b - opts.margin {
        return Err(Error::Invalid(format!("s0 = {} is outside (-b + margin, b - margin)", opts.s0)));
    }
    let s0 = opts.s0;
    let dphi0 = match ode.kind {
        OdeKind::OdeStar { sign } => {
            let (q, _) = ode.q_star(&s0, sign)?;
            q * phi0 / (1.0 + s0 * q)
        }
        _ => dphi0,
    };
    let dd0 = ode.second_derivative(&s0, &phi0, &dphi0)?;
    let regularity = |s: f64, y: &[f64; 2], dd: f64| y[0] - s * y[1] + (b * b - s * s) * dd;
    // every (ODE*) solution has the regularity expression identically zero,
    // so only the general and sphere equations are stopped by it
    let enforce = !matches!(ode.kind, OdeKind::OdeStar { .. });
    if enforce && regularity(s0, &[phi0, dphi0], dd0) <= 0.0 {
        return Err(Error::Invalid("initial data violate the regularity condition".into()));
    }

    // states are kept two orders tighter than `tol`: off-grid values come
    // from the quintic interpolant, whose phi'' error dominates near |s| = b
    let rk_opts = rk::Options {
        rtol: opts.tol * 1e-2,
        atol: opts.tol * 1e-2,
        ..rk::Options::default()
    };
    let rhs = |s: f64, y: &[f64; 2]| -> Result<[f64; 2]> { Ok([y[1], ode.second_derivative(&s, &y[0], &y[1])?]) };
    let accept = |s: f64, y: &[f64; 2]| -> Result<()> {
        if !(y[0] > 0.0) || y[0].abs() > PHI_BLOWUP {
            return Err(Error::PhiDomain { kind: "numeric", s });
        }
        let dd = ode.second_derivative(&s, &y[0], &y[1])?;
        if enforce && regularity(s, y, dd) <= 0.0 {
            return Err(Error::Invalid(format!("regularity fails at s = {s}")));
        }
        Ok(())
    };
    let end = b - opts.margin;
    let fwd = rk::integrate(rhs, s0, [phi0, dphi0], end, &rk_opts, accept);
    let bwd = rk::integrate(rhs, s0, [phi0, dphi0], -end, &rk_opts, accept);

    let mut s = Vec::with_capacity(fwd.t.len() + bwd.t.len());
    let mut phi = Vec::with_capacity(s.capacity());
    let mut dphi = Vec::with_capacity(s.capacity());
    for (t, y) in bwd.t.iter().zip(&bwd.y).rev().chain(fwd.t.iter().zip(&fwd.y).skip(1)) {
        s.push(*t);
        phi.push(y[0]);
        dphi.push(y[1]);
    }
    if s.len() < 2 {
        return Err(Error::DegenerateOde { s: s0 });
    }
    let ddphi: Vec<f64> = s
        .iter()
        .zip(phi.iter().zip(&dphi))
        .map(|(&t, (&p, &d))| ode.second_derivative(&t, &p, &d))
        .collect::<Result<_>>()?;
    let min_regularity = s
        .iter()
        .enumerate()
        .map(|(i, &t)| regularity(t, &[phi[i], dphi[i]], ddphi[i]))
        .fold(f64::INFINITY, f64::min);
    let sol = PhiSolution {
        meta: SolutionMeta {
            ode,
            s0,
            phi0,
            dphi0,
            tol: opts.tol,
            margin: opts.margin,
            truncated_low: bwd.stopped.map(|e| e.to_string()),
            truncated_high: fwd.stopped.map(|e| e.to_string()),
            min_regularity,
        },
        s,
        phi,
        dphi,
        ddphi,
    };
    Ok(sol)
}

/// Largest residual with `phi, phi', phi''` all taken from the interpolant,
/// relative to the largest term of the equation (floored at 1); near
/// `|s| = b` the individual terms grow without bound.
pub fn back_substitution_residual(sol: &PhiSolution, samples: &[f64]) -> Result<f64> {
    let c = &sol.meta.ode.constants;
    let b2 = c.b * c.b;
    let mut worst = 0.0_f64;
    for &s in samples {
        let [p, d, dd] = sol.interpolate(s)?;
        let pj = PhiJet::from_values(s, b2, p, d, dd)?;
        let w = b2 - s * s;
        let scale = [
            1.0,
            (w * (1.0 + s * pj.q) * pj.q_s).abs(),
            (b2 * pj.q * pj.q).abs(),
            (w * pj.q * pj.q).abs(),
            (c.k * b2 * p * p).abs(),
            p * p,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        worst = worst.max(sol.meta.ode.residual(&pj).abs() / scale);
    }
    Ok(worst)
}

/// `phi = (sqrt(k + s^2) + sign s) / sqrt(k)` and `|c19|` there.
pub fn closed_form_sqrt_profile(k: f64, s: f64, sign: f64) -> Result<(f64, f64)> {
    if !(k > 0.0) {
        return Err(Error::Invalid(format!("k must be positive, got {k}")));
    }
    let phi = PhiSpec::RandersType {
        k1: 1.0,
        k2: 1.0 / k,
        k3: sign / k.sqrt(),
    };
    // b^2 does not enter c19
    let pj = eval_phi_jet(&phi, s, 1.0)?;
    Ok((pj.phi, pj.c19.abs()))
}

/// Which set of Einstein conditions to test: `s^i_m s^m_i = (n-1) tau`
/// (`Trace`) or `s_0m s^m_0 = tau (b^2 alpha^2 - beta^2) / b^2` (`Proportional`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionCase {
    Trace,
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TraceCase,
    ProportionalCase,
    RandersCase,
    ParallelBeta,
    Fail,
}

/// Directions sampled at one base point.
#[derive(Debug, Clone)]
pub struct PointSamples {
    pub x: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub case: ConditionCase,
    /// Mean of the per-point estimates.
    pub tau_hat: f64,
    pub tau_per_point: Vec<f64>,
    /// `max - min` of the per-point estimates.
    pub tau_spread: f64,
    /// `Ric_alpha = (n-1) tau (K1 alpha^2 + K2 (b^2 alpha^2 - beta^2)) - K3 s_0m s^m_0`, relative.
    pub residual_ric_bar: f64,
    /// The equation `tau` is fitted from, relative.
    pub residual_tau: f64,
    /// `s^m_0;m = -(n-1) tau beta / b^2`, relative.
    pub residual_divergence: f64,
    pub k_hat: f64,
    pub verdict: Verdict,
}

pub const MIN_DIRECTIONS: usize = 12;
const CONDITION_TOL: f64 = 1e-6;

fn rel(lhs: f64, rhs: f64, floor: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(floor)
}

/// Estimates `tau` per point by least squares from the selected condition on
/// `s`, then reports relative residuals of all three conditions.
pub fn einstein_condition_check<G: ChartGeometry>(
    m: &ABMetric<G>,
    case: ConditionCase,
    c: &OdeConstants,
    points: &[PointSamples],
) -> Result<ConditionReport> {
    if points.is_empty() || points.iter().any(|p| p.ys.len() < MIN_DIRECTIONS) {
        return Err(Error::Invalid(format!("need at least one point with {MIN_DIRECTIONS} directions each")));
    }
    let n1 = m.dim() as f64 - 1.0;
    let (k1, k2, k3) = match case {
        ConditionCase::Trace => c.k_star(),
        ConditionCase::Proportional => {
            let (a, b) = c.k_general();
            (a, b, 0.0)
        }
    };
    let mut taus = Vec::with_capacity(points.len());
    let mut res = [0.0_f64; 3];
    let mut all_parallel = true;
    for p in points {
        let mut rows = Vec::with_capacity(p.ys.len());
        for y in &p.ys {
            let t = crate::metric::TangentSample::new(p.x.clone(), y.clone());
            let d = beta_derivatives(m, &t)?;
            let ric_bar = alpha_curvature(m, &t)?.ric_bar;
            if crate::linalg::max_abs(&d.s_a) > 1e-12 * d.scale() {
                all_parallel = false;
            }
            rows.push((d, ric_bar));
        }
        if all_parallel {
            continue;
        }
        let b2 = rows[0].0.b_up.iter().zip(&rows[0].0.b_low).map(|(u, l)| u * l).sum::<f64>();
        let tau = match case {
            ConditionCase::Proportional => {
                let (mut num, mut den) = (0.0, 0.0);
                for (d, _) in &rows {
                    let z = (b2 * d.alpha * d.alpha - d.beta * d.beta) / b2;
                    num += z * d.s0m_sm0;
                    den += z * z;
                }
                if den <= 1e-300 {
                    return Err(Error::Invalid("degenerate least squares for tau".into()));
                }
                num / den
            }
            ConditionCase::Trace => rows.iter().map(|(d, _)| d.sisj_trace).sum::<f64>() / (n1 * rows.len() as f64),
        };
        for (d, ric_bar) in &rows {
            let a2 = d.alpha * d.alpha;
            let perp = b2 * a2 - d.beta * d.beta;
            let ric_rhs = n1 * tau * (k1 * a2 + k2 * perp) - k3 * d.s0m_sm0;
            let (fit_l, fit_r, fit_floor) = match case {
                ConditionCase::Proportional => (d.s0m_sm0, tau * perp / b2, a2),
                ConditionCase::Trace => (d.sisj_trace, n1 * tau, 1.0),
            };
            let div_rhs = -n1 * tau * d.beta / b2;
            res[0] = res[0].max(rel(*ric_bar, ric_rhs, a2));
            res[1] = res[1].max(rel(fit_l, fit_r, fit_floor));
            res[2] = res[2].max(rel(d.div_s0, div_rhs, d.alpha));
        }
        taus.push(tau);
    }
    if all_parallel {
        return Ok(ConditionReport {
            case,
            tau_hat: 0.0,
            tau_per_point: vec![],
            tau_spread: 0.0,
            residual_ric_bar: 0.0,
            residual_tau: 0.0,
            residual_divergence: 0.0,
            k_hat: 0.0,
            verdict: Verdict::ParallelBeta,
        });
    }
    let tau_hat = taus.iter().sum::<f64>() / taus.len() as f64;
    let spread = taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - taus.iter().cloned().fold(f64::INFINITY, f64::min);
    let ok = res.iter().all(|r| *r < CONDITION_TOL) && spread < CONDITION_TOL * tau_hat.abs().max(1.0);
    let verdict = match (ok, case) {
        (true, ConditionCase::Proportional) if tau_hat.abs() > 1e-12 => Verdict::ProportionalCase,
        (true, ConditionCase::Trace) => Verdict::TraceCase,
        _ if m.phi.is_randers_type() => Verdict::RandersCase,
        _ => Verdict::Fail,
    };
    Ok(ConditionReport {
        case,
        tau_hat,
        tau_per_point: taus,
        tau_spread: spread,
        residual_ric_bar: res[0],
        residual_tau: res[1],
        residual_divergence: res[2],
        k_hat: match case {
            ConditionCase::Proportional => c.k * tau_hat,
            ConditionCase::Trace => 0.0,
        },
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn randers_solves_sphere_k1() {
        for s in [-0.4, -0.1, 0.0, 0.2, 0.45] {
            let pj = eval_phi_jet(&PhiSpec::Randers, s, 0.25).unwrap();
            assert!(residual_ode_sphere(&pj, 1, 0.5).abs() < 1e-14);
            let r0 = residual_ode_sphere(&pj, 0, 0.5);
            assert!((r0 + (1.0 + s) * (1.0 + s)).abs() < 1e-14);
        }
    }

    #[test]
    fn general_equation_reduces_to_sphere_cases() {
        let b = 0.6;
        let phi = PhiSpec::RandersType { k1: 1.1, k2: 0.4, k3: 0.3 };
        for k_sign in [1, 0, -1] {
            for d1 in [0.0, 0.7, -1.3] {
                let c = OdeConstants::sphere_case(k_sign, b, d1).unwrap();
                assert!((c.big_k1 + 1.0 / (b * b)).abs() < 1e-12);
                assert!((c.big_k2 - 2.0 / (b * b)).abs() < 1e-12);
                for s in [-0.5, 0.1, 0.55] {
                    let pj = eval_phi_jet(&phi, s, b * b).unwrap();
                    let diff = residual_ode(&pj, &c) - residual_ode_sphere(&pj, k_sign, b);
                    assert!(diff.abs() < 1e-12, "K={k_sign} d1={d1} s={s}: {diff}");
                }
            }
        }
    }

    #[test]
    fn trivial_profile_has_zero_residual() {
        let c = OdeConstants::general(0.5, 3, 0.0, 0.3, 0.0, 0.0);
        let pj = eval_phi_jet(&PhiSpec::Riemannian, 0.2, 0.25).unwrap();
        assert_eq!(residual_ode(&pj, &c), 0.0);
    }

    #[test]
    fn ode_star_residuals() {
        let c = OdeConstants::star(0.5, 1.0, 3);
        let phi = PhiSpec::OdeStarClosed { c1: 1.0, delta: 1.0, b: 0.5, sign: 1.0 };
        let pj = eval_phi_jet(&phi, 0.2, 0.25).unwrap();
        assert!(residual_ode_star(pj.q, 0.2, &c) < 1e-12);
        assert_eq!(residual_ode_star(1.0, 0.0, &c), 0.0);
        let r = eval_phi_jet(&PhiSpec::Randers, 0.2, 0.25).unwrap();
        assert!(residual_ode_star(r.q, 0.2, &c) > 0.1);
        let (k1, k2, k3) = c.k_star();
        assert_eq!((k1, k2, k3), (-4.0, 4.0 * 5.0, -10.0));
    }

    #[test]
    fn sqrt_profile_closed_form() {
        let (phi, r) = closed_form_sqrt_profile(1.0, 0.0, 1.0).unwrap();
        assert!((phi - 1.0).abs() < 1e-15 && r < 1e-12);
        assert!(closed_form_sqrt_profile(4.0, 0.3, 1.0).unwrap().1 < 1e-12);
        assert!(closed_form_sqrt_profile(4.0, 0.3, -1.0).unwrap().1 < 1e-12);
    }

    #[test]
    fn sphere_k1_recovers_randers() {
        let sol = solve_phi_ivp(OdeSpec::sphere(1, 0.5).unwrap(), 1.0, 1.0, IvpOptions::default()).unwrap();
        assert!(sol.meta.truncated_high.is_none() && sol.meta.truncated_low.is_none());
        let worst = sol
            .s
            .iter()
            .zip(&sol.phi)
            .map(|(s, p)| (p - (1.0 + s)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn series_derivatives_match_interpolant() {
        let sol = solve_phi_ivp(OdeSpec::sphere(1, 0.5).unwrap(), 1.0, 0.3, IvpOptions::default()).unwrap();
        let s = 0.123;
        let c = sol.local_series(s, 4).unwrap();
        let [p, d, dd] = sol.interpolate(s).unwrap();
        assert!((c[0] - p).abs() < 1e-15);
        assert!((c[1] - d).abs() < 1e-15);
        assert!((2.0 * c[2] - dd).abs() < 1e-7);
    }

    #[test]
    fn solution_json_roundtrip() {
        let sol = solve_phi_ivp(OdeSpec::sphere(0, 0.5).unwrap(), 1.0, 0.3, IvpOptions::default()).unwrap();
        let text = serde_json::to_string(&sol).unwrap();
        let back: PhiSolution = serde_json::from_str(&text).unwrap();
        assert_eq!(back.s.len(), sol.s.len());
        assert_eq!(back.interpolate(0.1).unwrap(), sol.interpolate(0.1).unwrap());
    }
}
