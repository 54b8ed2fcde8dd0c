//! Profiles `phi(s)`, chart-based `(alpha, beta)`-metrics, and the
//! `s`-dependent coefficient functions of the spray and curvature formulas.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet2, Scalar};
use crate::linalg::{self, Mat};
use crate::ode::PhiSolution;

/// Threshold on `|phi - s phi'|` and on fundamental-tensor determinants.
pub const SINGULAR_TOL: f64 = 1e-12;

/// A profile `phi(s)` of an `(alpha, beta)`-metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhiSpecRepr", into = "PhiSpecRepr")]
pub enum PhiSpec {
    /// `phi = 1`
    Riemannian,
    /// `phi = 1 + s`
    Randers,
    /// `phi = 1 / s` on the branch `sign * s > 0`.
    Kropina { sign: f64 },
    /// `phi = k1 sqrt(1 + k2 s^2) + k3 s`
    RandersType { k1: f64, k2: f64, k3: f64 },
    /// `phi = c1 (sqrt(b^2 - s^2) + sign sqrt(delta) b s)`, `|s| < b`.
    OdeStarClosed { c1: f64, delta: f64, b: f64, sign: f64 },
    /// `phi = sum coeffs[k] s^k`
    Polynomial(Vec<f64>),
    /// Numerical solution of one of the profile ODEs.
    Numeric(Arc<PhiSolution>),
}

#[derive(Serialize, Deserialize)]
struct PhiSpecRepr {
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solution: Option<PhiSolution>,
}

impl TryFrom<PhiSpecRepr> for PhiSpec {
    type Error = String;

    fn try_from(r: PhiSpecRepr) -> std::result::Result<Self, String> {
        let p = &r.params;
        let need = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(format!("phi kind '{}' takes {n} params, got {}", r.kind, p.len()))
            }
        };
        Ok(match r.kind.as_str() {
            "riemannian" => PhiSpec::Riemannian,
            "randers" => PhiSpec::Randers,
            "kropina" => PhiSpec::Kropina {
                sign: p.first().copied().unwrap_or(1.0).signum(),
            },
            "randers_type" => {
                need(3)?;
                PhiSpec::RandersType { k1: p[0], k2: p[1], k3: p[2] }
            }
            "ode_star_closed" => {
                need(4)?;
                PhiSpec::OdeStarClosed { c1: p[0], delta: p[1], b: p[2], sign: p[3].signum() }
            }
            "polynomial" => {
                if p.is_empty() {
                    return Err("polynomial profile needs at least one coefficient".into());
                }
                PhiSpec::Polynomial(p.clone())
            }
            "numeric" => PhiSpec::Numeric(Arc::new(
                r.solution.ok_or("numeric profile needs an embedded 'solution'")?,
            )),
            other => return Err(format!("unknown phi kind '{other}'")),
        })
    }
}

impl From<PhiSpec> for PhiSpecRepr {
    fn from(p: PhiSpec) -> Self {
        let (kind, params, solution) = match p {
            PhiSpec::Riemannian => ("riemannian", vec![], None),
            PhiSpec::Randers => ("randers", vec![], None),
            PhiSpec::Kropina { sign } => ("kropina", vec![sign], None),
            PhiSpec::RandersType { k1, k2, k3 } => ("randers_type", vec![k1, k2, k3], None),
            PhiSpec::OdeStarClosed { c1, delta, b, sign } => ("ode_star_closed", vec![c1, delta, b, sign], None),
            PhiSpec::Polynomial(c) => ("polynomial", c, None),
            PhiSpec::Numeric(sol) => ("numeric", vec![], Some((*sol).clone())),
        };
        PhiSpecRepr {
            kind: kind.to_string(),
            params,
            solution,
        }
    }
}

/// Anything that can evaluate a profile at a [`Scalar`] argument.
pub trait PhiFunction {
    fn phi<T: Scalar>(&self, s: &T) -> Result<T>;
}

impl PhiFunction for PhiSpec {
    fn phi<T: Scalar>(&self, s: &T) -> Result<T> {
        match self {
            PhiSpec::Riemannian => Ok(T::cst(1.0)),
            PhiSpec::Randers => Ok(s.clone() + 1.0),
            PhiSpec::Kropina { sign } => {
                if s.re() * sign <= 0.0 {
                    return Err(Error::PhiDomain { kind: "kropina", s: s.re() });
                }
                Ok(s.recip()?)
            }
            PhiSpec::RandersType { k1, k2, k3 } => {
                let root = (s.square() * *k2 + 1.0).sqrt()?;
                Ok(root * *k1 + s.scale(*k3))
            }
            PhiSpec::OdeStarClosed { c1, delta, b, sign } => {
                if s.re().abs() >= *b {
                    return Err(Error::PhiDomain { kind: "ode_star_closed", s: s.re() });
                }
                let root = (T::cst(b * b) - s.square()).sqrt()?;
                Ok((root + s.scale(sign * f64::sqrt(*delta) * b)) * *c1)
            }
            PhiSpec::Polynomial(c) => {
                let mut acc = T::cst(*c.last().unwrap());
                for &ck in c.iter().rev().skip(1) {
                    acc = acc.mul_ref(s) + ck;
                }
                Ok(acc)
            }
            PhiSpec::Numeric(sol) => sol.eval_scalar(s),
        }
    }
}

impl PhiSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            PhiSpec::Riemannian => "riemannian",
            PhiSpec::Randers => "randers",
            PhiSpec::Kropina { .. } => "kropina",
            PhiSpec::RandersType { .. } => "randers_type",
            PhiSpec::OdeStarClosed { .. } => "ode_star_closed",
            PhiSpec::Polynomial(_) => "polynomial",
            PhiSpec::Numeric(_) => "numeric",
        }
    }

    /// True for `phi = k1 sqrt(1 + k2 s^2) + k3 s` shapes, Randers included.
    pub fn is_randers_type(&self) -> bool {
        matches!(self, PhiSpec::Randers | PhiSpec::RandersType { .. })
    }
}

/// All `s`-dependent scalars of the metric family at one `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiJet {
    pub s: f64,
    pub b2: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub q: f64,
    pub q_s: f64,
    pub theta: f64,
    pub psi: f64,
    pub c19: f64,
    pub c24: f64,
    pub c26: f64,
    pub c331: f64,
    pub c332: f64,
    pub c333: f64,
    pub c311: f64,
    pub c340: f64,
}

impl PhiJet {
    /// Fills every field from `phi, phi', phi''` and a known `Q_s`.
    fn assemble(s: f64, b2: f64, phi: f64, dphi: f64, ddphi: f64, q: f64, q_s: f64) -> Self {
        let reg = (phi - s * dphi) + (b2 - s * s) * ddphi;
        let theta = (phi * dphi - s * (phi * ddphi + dphi * dphi)) / (2.0 * phi * reg);
        let psi = ddphi / (2.0 * reg);
        Self {
            s,
            b2,
            phi,
            dphi,
            ddphi,
            q,
            q_s,
            theta,
            psi,
            c19: -2.0 * q * q + 2.0 * (1.0 + s * q) * q_s,
            c24: 2.0 * q,
            c26: -q * q,
            c331: -3.0 * q * q + 3.0 * s * q * q_s + 3.0 * q_s,
            c332: (q - s * q_s) * q,
            c333: q * q_s,
            c311: s * q_s - q,
            c340: -2.0 * (q_s * (b2 - s * s) + s * q + 1.0) * psi + q_s,
        }
    }

    /// Builds the record from point values, using `Q_s = phi phi'' / (phi - s phi')^2`.
    pub fn from_values(s: f64, b2: f64, phi: f64, dphi: f64, ddphi: f64) -> Result<Self> {
        let d = phi - s * dphi;
        if d.abs() < SINGULAR_TOL {
            return Err(Error::SingularQ { s });
        }
        let q = dphi / d;
        let q_s = phi * ddphi / (d * d);
        Ok(Self::assemble(s, b2, phi, dphi, ddphi, q, q_s))
    }

    /// `phi - s phi' + (b^2 - s^2) phi''`
    pub fn regularity(&self) -> f64 {
        self.phi - self.s * self.dphi + (self.b2 - self.s * self.s) * self.ddphi
    }
}

/// Evaluates every coefficient of the profile at `s`, with `Q_s` taken as
/// the jet derivative of `Q`.
pub fn eval_phi_jet<P: PhiFunction>(phi: &P, s: f64, b2: f64) -> Result<PhiJet> {
    // outer and inner levels both seeded on s
    let sj: Jet2<Jet2<f64>> = Jet2::variable(Jet2::variable(s, 0, 1), 0, 1);
    let f = phi.phi(&sj)?;
    let value = f.value().clone(); // (phi, phi', phi'') in s
    let slope = f.d(0); // (phi', phi'', phi''')
    let s_in = Jet2::variable(s, 0, 1);
    let denom = value.sub_ref(&s_in.mul_ref(&slope));
    if denom.re().abs() < SINGULAR_TOL {
        return Err(Error::SingularQ { s });
    }
    let q = slope.checked_div(&denom)?;
    Ok(PhiJet::assemble(
        s,
        b2,
        *value.value(),
        value.d(0),
        value.dd(0, 0),
        *q.value(),
        q.d(0),
    ))
}

/// Metric data `a_ij(x)`, `b_i(x)` at one chart point.
#[derive(Debug, Clone)]
pub struct ChartData<T> {
    pub a: Mat<T>,
    pub b: Vec<T>,
}

/// A chart carrying a Riemannian metric `alpha` and a one-form `beta`.
///
/// Implementations must be reentrant: every method may be called
/// concurrently from several threads with different scalar types.
pub trait ChartGeometry: Send + Sync {
    fn dim(&self) -> usize;

    fn metric<T: Scalar>(&self, x: &[T]) -> Result<ChartData<T>>;

    /// `(alpha^2, beta)` at `(x, y)`.
    fn alpha_beta<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<(T, T)> {
        let data = self.metric(x)?;
        Ok((linalg::bilinear(&data.a, y, y), linalg::dot(&data.b, y)))
    }

    /// `||beta||_alpha` when it is known to be constant.
    fn constant_b_len(&self) -> Option<f64> {
        None
    }
}

/// Base point and direction in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentSample {
    pub fn new(x: impl Into<Vec<f64>>, y: impl Into<Vec<f64>>) -> Self {
        Self { x: x.into(), y: y.into() }
    }
}

/// `F = alpha phi(beta / alpha)` on a chart.
#[derive(Debug, Clone)]
pub struct ABMetric<G> {
    pub geometry: G,
    pub phi: PhiSpec,
}

/// Fundamental tensor and its inverse at one `(x, y)`.
#[derive(Debug, Clone)]
pub struct FundamentalTensor {
    pub g: Mat<f64>,
    pub g_inv: Mat<f64>,
}

impl<G: ChartGeometry> ABMetric<G> {
    pub fn new(geometry: G, phi: PhiSpec) -> Self {
        Self { geometry, phi }
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    /// `(alpha, s)` at `(x, y)`.
    pub fn alpha_s<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<(T, T)> {
        let (a2, beta) = self.geometry.alpha_beta(x, y)?;
        if a2.re() <= 0.0 {
            return Err(Error::DegenerateDirection);
        }
        let alpha = a2.sqrt()?;
        let s = beta.checked_div(&alpha)?;
        Ok((alpha, s))
    }

    /// `F(x, y)` at any scalar level.
    pub fn finsler<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        let (alpha, s) = self.alpha_s(x, y)?;
        Ok(alpha.mul_ref(&self.phi.phi(&s)?))
    }

    /// `F^2(x, y)` at any scalar level.
    pub fn f_squared<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        Ok(self.finsler(x, y)?.square())
    }

    /// `||beta||_alpha` at `x`.
    pub fn b_len(&self, x: &[f64]) -> Result<f64> {
        if let Some(b) = self.geometry.constant_b_len() {
            return Ok(b);
        }
        let data = self.geometry.metric(x)?;
        let (inv, _) = linalg::invert(&data.a, SINGULAR_TOL)?;
        Ok(linalg::bilinear(&inv, &data.b, &data.b).max(0.0).sqrt())
    }
}

/// `F(x, y)`.
pub fn eval_f<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<f64> {
    m.finsler(&t.x, &t.y)
}

/// `g_ij = 1/2 [F^2]_{y^i y^j}` and its inverse.
pub fn fundamental_tensor<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<FundamentalTensor> {
    let n = m.dim();
    let x: Vec<Jet2<f64>> = t.x.iter().map(|&v| Jet2::constant(v)).collect();
    let y: Vec<Jet2<f64>> = t.y.iter().enumerate().map(|(k, &v)| Jet2::variable(v, k, n)).collect();
    let f2 = m.f_squared(&x, &y)?;
    let g: Mat<f64> = (0..n).map(|i| (0..n).map(|j| 0.5 * f2.dd(i, j)).collect()).collect();
    let (g_inv, _) = linalg::invert(&g, SINGULAR_TOL)?;
    Ok(FundamentalTensor { g, g_inv })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularity {
    Regular,
    /// Violations only at `|s| = b`.
    AlmostRegular,
    Irregular,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    /// Minimum of `phi - s phi' + (b^2 - s^2) phi''` over evaluable nodes.
    pub min_expression: f64,
    pub s_at_min_expression: f64,
    pub min_phi: f64,
    pub s_at_min_phi: f64,
    pub verdict: Regularity,
}

/// Scans `grid` (points of `[-b, b]`) for violations of the positivity
/// conditions on `phi`. Evaluation failures at `|s| = b` count as boundary
/// violations; failures inside propagate.
pub fn regularity_check<P: PhiFunction>(phi: &P, b: f64, grid: &[f64]) -> Result<RegularityReport> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty s-grid".into()));
    }
    let on_boundary = |s: f64| (s.abs() - b).abs() <= 1e-12 * b.max(1.0);
    let mut report = RegularityReport {
        min_expression: f64::INFINITY,
        s_at_min_expression: f64::NAN,
        min_phi: f64::INFINITY,
        s_at_min_phi: f64::NAN,
        verdict: Regularity::Regular,
    };
    let (mut inner_bad, mut edge_bad) = (false, false);
    for &s in grid {
        let sj: Jet2<f64> = Jet2::variable(s, 0, 1);
        let (f, expr) = match phi.phi(&sj) {
            Ok(f) => {
                let expr = f.re() - s * f.d(0) + (b * b - s * s) * f.dd(0, 0);
                (f.re(), expr)
            }
            Err(_) if on_boundary(s) => {
                edge_bad = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        if expr < report.min_expression {
            report.min_expression = expr;
            report.s_at_min_expression = s;
        }
        if f < report.min_phi {
            report.min_phi = f;
            report.s_at_min_phi = s;
        }
        if expr <= SINGULAR_TOL || f <= 0.0 {
            if on_boundary(s) {
                edge_bad = true;
            } else {
                inner_bad = true;
            }
        }
    }
    report.verdict = if inner_bad {
        Regularity::Irregular
    } else if edge_bad {
        Regularity::AlmostRegular
    } else {
        Regularity::Regular
    };
    Ok(report)
}

/// Flat chart with constant `a` and a polynomial one-form
/// `b_i(x) = c_i + L_ij x^j + Q_ijk x^j x^k`.
#[derive(Debug, Clone)]
pub struct FlatChart {
    pub a: Mat<f64>,
    pub b0: Vec<f64>,
    pub b_lin: Mat<f64>,
    pub b_quad: Vec<Mat<f64>>,
}

impl FlatChart {
    pub fn euclidean(n: usize) -> Self {
        let a = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            a,
            b0: vec![0.0; n],
            b_lin: vec![vec![0.0; n]; n],
            b_quad: vec![vec![vec![0.0; n]; n]; n],
        }
    }

    pub fn with_constant_b(mut self, b: Vec<f64>) -> Self {
        self.b0 = b;
        self
    }
}

impl ChartGeometry for FlatChart {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn metric<T: Scalar>(&self, x: &[T]) -> Result<ChartData<T>> {
        let n = self.dim();
        let a = self
            .a
            .iter()
            .map(|r| r.iter().map(|&v| T::cst(v)).collect())
            .collect();
        let b = (0..n)
            .map(|i| {
                let mut bi = T::cst(self.b0[i]);
                for j in 0..n {
                    if self.b_lin[i][j] != 0.0 {
                        bi += x[j].scale(self.b_lin[i][j]);
                    }
                    for k in 0..n {
                        if self.b_quad[i][j][k] != 0.0 {
                            bi += x[j].mul_ref(&x[k]).scale(self.b_quad[i][j][k]);
                        }
                    }
                }
                bi
            })
            .collect();
        Ok(ChartData { a, b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn randers_jet_at_point_two() {
        let j = eval_phi_jet(&PhiSpec::Randers, 0.2, 0.25).unwrap();
        assert!(close(j.phi, 1.2, 1e-15));
        assert_eq!((j.dphi, j.ddphi), (1.0, 0.0));
        assert!(close(j.q, 1.0, 1e-15));
        assert_eq!(j.q_s, 0.0);
        assert!(close(j.c19, -2.0, 1e-15));
        assert!(close(j.c24, 2.0, 1e-15));
        assert!(close(j.c26, -1.0, 1e-15));
    }

    #[test]
    fn riemannian_coefficients_vanish() {
        for s in [-0.4, 0.0, 0.3] {
            let j = eval_phi_jet(&PhiSpec::Riemannian, s, 0.5).unwrap();
            for v in [j.q, j.q_s, j.theta, j.psi, j.c19, j.c24, j.c26] {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn kropina_q_at_half() {
        let j = eval_phi_jet(&PhiSpec::Kropina { sign: 1.0 }, 0.5, 0.81).unwrap();
        assert!(close(j.q, -1.0, 1e-14));
        assert!(close(j.q_s, 2.0, 1e-13));
    }

    #[test]
    fn kropina_rejects_wrong_branch() {
        let err = eval_phi_jet(&PhiSpec::Kropina { sign: 1.0 }, -0.5, 0.81).unwrap_err();
        assert!(matches!(err, Error::PhiDomain { kind: "kropina", .. }));
    }

    #[test]
    fn singular_q_is_reported() {
        // phi = s has phi - s phi' = 0 everywhere
        let err = eval_phi_jet(&PhiSpec::Polynomial(vec![0.0, 1.0]), 0.3, 0.5).unwrap_err();
        assert_eq!(err, Error::SingularQ { s: 0.3 });
    }

    #[test]
    fn jet_q_s_matches_closed_expression() {
        let phi = PhiSpec::RandersType { k1: 1.3, k2: 0.7, k3: 0.4 };
        for s in [-0.5, -0.1, 0.2, 0.6] {
            let j = eval_phi_jet(&phi, s, 0.64).unwrap();
            let alt = PhiJet::from_values(s, 0.64, j.phi, j.dphi, j.ddphi).unwrap();
            assert!(close(j.q_s, alt.q_s, 1e-13 * alt.q_s.abs().max(1.0)));
        }
    }

    #[test]
    fn randers_type_reduces_to_randers() {
        let rt = PhiSpec::RandersType { k1: 1.0, k2: 0.0, k3: 1.0 };
        for s in [-0.3, 0.0, 0.45] {
            let a = eval_phi_jet(&rt, s, 0.5).unwrap();
            let b = eval_phi_jet(&PhiSpec::Randers, s, 0.5).unwrap();
            assert!(close(a.phi, b.phi, 1e-12) && close(a.q, b.q, 1e-12) && close(a.c19, b.c19, 1e-12));
        }
    }

    #[test]
    fn phi_spec_json_shape() {
        let p: PhiSpec = serde_json::from_str(r#"{"kind":"randers_type","params":[1,0.5,0.2]}"#).unwrap();
        assert_eq!(p, PhiSpec::RandersType { k1: 1.0, k2: 0.5, k3: 0.2 });
        let back = serde_json::to_string(&PhiSpec::Randers).unwrap();
        assert_eq!(back, r#"{"kind":"randers","params":[]}"#);
        assert!(serde_json::from_str::<PhiSpec>(r#"{"kind":"nope"}"#).is_err());
        assert!(serde_json::from_str::<PhiSpec>(r#"{"kind":"randers_type","params":[1]}"#).is_err());
    }

    fn grid(b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| -b + 2.0 * b * i as f64 / n as f64).collect()
    }

    #[test]
    fn randers_is_regular() {
        let r = regularity_check(&PhiSpec::Randers, 0.5, &grid(0.5, 100)).unwrap();
        assert!(close(r.min_expression, 1.0, 1e-14));
        assert_eq!(r.verdict, Regularity::Regular);
        let r = regularity_check(&PhiSpec::Riemannian, 0.5, &grid(0.5, 100)).unwrap();
        assert_eq!(r.min_expression, 1.0);
        assert_eq!(r.verdict, Regularity::Regular);
    }

    #[test]
    fn ode_star_closed_form_is_degenerate_everywhere() {
        // phi - s phi' = b^2 / r and (b^2 - s^2) phi'' = -b^2 / r cancel exactly.
        let phi = PhiSpec::OdeStarClosed { c1: 1.0, delta: 1.0, b: 0.5, sign: 1.0 };
        let r = regularity_check(&phi, 0.5, &grid(0.5, 200)).unwrap();
        assert!(r.min_expression.abs() < 1e-12);
        assert_eq!(r.verdict, Regularity::Irregular);
    }

    #[test]
    fn almost_regular_when_violation_only_at_edge() {
        // phi = 1 + s^2/b^2: the expression is 3 (1 - s^2/b^2)
        let b = 0.5;
        let phi = PhiSpec::Polynomial(vec![1.0, 0.0, 1.0 / (b * b)]);
        let r = regularity_check(&phi, b, &grid(b, 50)).unwrap();
        assert_eq!(r.verdict, Regularity::AlmostRegular);
    }

    #[test]
    fn flat_chart_reports_constant_metric() {
        let chart = FlatChart::euclidean(3).with_constant_b(vec![0.3, 0.0, 0.0]);
        let m = ABMetric::new(chart, PhiSpec::Riemannian);
        let t = TangentSample::new([0.1, 0.2, 0.3], [1.0, 2.0, 2.0]);
        assert!(close(eval_f(&m, &t).unwrap(), 3.0, 1e-15));
        let ft = fundamental_tensor(&m, &t).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(ft.g[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        assert!(close(m.b_len(&t.x).unwrap(), 0.3, 1e-15));
    }

    #[test]
    fn zero_direction_is_degenerate() {
        let m = ABMetric::new(FlatChart::euclidean(3), PhiSpec::Randers);
        let t = TangentSample::new([0.0; 3], [0.0; 3]);
        assert_eq!(eval_f(&m, &t).unwrap_err(), Error::DegenerateDirection);
    }
}
