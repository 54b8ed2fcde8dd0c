//! Spray coefficients and curvature of `F`, by two independent routes:
//! jet differentiation of `F^2` (generic) and the closed formulas in terms
//! of covariant derivatives of `beta` (alphabeta).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet2, Scalar};
use crate::linalg::{self, Mat};
use crate::metric::{eval_phi_jet, ABMetric, ChartGeometry, PhiFunction, PhiJet, PhiSpec, TangentSample, SINGULAR_TOL};
use crate::quadrature::{unit_ball_volume, SphereGrid};
use crate::riemannian::{self, beta_derivatives, BetaDerivatives};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Generic,
    Alphabeta,
}

/// Seeds `(x, y)` as two nested jet levels over the same `2n` variables:
/// `x^i` at slot `i`, `y^k` at slot `n + k`.
pub(crate) fn seed_xy<T: Scalar>(x: &[T], y: &[T]) -> (Vec<Jet2<Jet2<T>>>, Vec<Jet2<Jet2<T>>>) {
    let n = x.len();
    let seed = |v: &T, slot: usize| Jet2::variable(Jet2::variable(v.clone(), slot, 2 * n), slot, 2 * n);
    (
        x.iter().enumerate().map(|(i, v)| seed(v, i)).collect(),
        y.iter().enumerate().map(|(k, v)| seed(v, n + k)).collect(),
    )
}

/// `G^i = 1/4 g^{il} {[F^2]_{x^k y^l} y^k - [F^2]_{x^l}}` as jets over `(x, y)`.
pub(crate) fn generic_spray_levels<G: ChartGeometry, T: Scalar>(m: &ABMetric<G>, x: &[T], y: &[T]) -> Result<Vec<Jet2<T>>> {
    let n = m.dim();
    let (xo, yo) = seed_xy(x, y);
    let f2 = m.f_squared(&xo, &yo)?;
    let ym: Vec<Jet2<T>> = yo.iter().map(|v| v.value().clone()).collect();
    let g: Mat<Jet2<T>> = (0..n)
        .map(|i| (0..n).map(|j| f2.dd(n + i, n + j) * 0.5).collect())
        .collect();
    let (g_inv, _) = linalg::invert(&g, SINGULAR_TOL)?;
    let w: Vec<Jet2<T>> = (0..n)
        .map(|l| {
            let mut acc = -f2.d(l);
            for (k, yk) in ym.iter().enumerate() {
                acc += f2.dd(k, n + l).mul_ref(yk);
            }
            acc
        })
        .collect();
    Ok(linalg::mat_vec(&g_inv, &w).into_iter().map(|v| v * 0.25).collect())
}

/// `R^i_k = 2 G^i_{x^k} - G^i_{x^m y^k} y^m + 2 G^m G^i_{y^m y^k} - G^i_{y^m} G^m_{y^k}`
/// from spray jets over `(x, y)`.
pub fn riemann_from_spray<T: Scalar>(g: &[Jet2<T>], y: &[T]) -> Mat<T> {
    let n = y.len();
    let mut r = linalg::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let mut acc = g[i].d(k).scale(2.0);
            for mm in 0..n {
                acc = acc - g[i].dd(mm, n + k).mul_ref(&y[mm]);
                acc += g[mm].value().mul_ref(&g[i].dd(n + mm, n + k)).scale(2.0);
                acc = acc - g[i].d(n + mm).mul_ref(&g[mm].d(n + k));
            }
            r[i][k] = acc;
        }
    }
    r
}

#[derive(Debug, Clone, Serialize)]
pub struct SprayOutput {
    pub g: Vec<f64>,
    pub gbar: Vec<f64>,
    /// `G^i - Gbar^i`
    pub t: Vec<f64>,
    pub pipeline: Pipeline,
}

fn gbar_of(d: &BetaDerivatives) -> Vec<f64> {
    let n = d.y.len();
    (0..n)
        .map(|i| 0.5 * linalg::bilinear(&d.christoffel[i], &d.y, &d.y))
        .collect()
}

/// Spray jets over `(x, y)` from the generic formula (for derivative checks).
pub fn spray_generic_jets<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<Vec<Jet2<f64>>> {
    generic_spray_levels(m, &t.x, &t.y)
}

pub fn spray_generic<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<SprayOutput> {
    let g: Vec<f64> = spray_generic_jets(m, t)?.iter().map(|v| *v.value()).collect();
    let gam = riemannian::christoffel(m, &t.x)?;
    let gbar: Vec<f64> = gam.iter().map(|gi| 0.5 * linalg::bilinear(gi, &t.y, &t.y)).collect();
    let tt = g.iter().zip(&gbar).map(|(a, b)| a - b).collect();
    Ok(SprayOutput {
        g,
        gbar,
        t: tt,
        pipeline: Pipeline::Generic,
    })
}

fn b2_of(d: &BetaDerivatives) -> f64 {
    linalg::dot(&d.b_up, &d.b_low)
}

fn phi_jet_of<G: ChartGeometry>(m: &ABMetric<G>, d: &BetaDerivatives) -> Result<PhiJet> {
    if d.alpha <= 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let b2 = m.geometry.constant_b_len().map_or_else(|| b2_of(d), |b| b * b);
    eval_phi_jet(&m.phi, d.beta / d.alpha, b2)
}

/// `G^i = Gbar^i + alpha Q s^i_0 + alpha^{-1} Theta (r00 - 2 Q alpha s0) y^i
///        + Psi (r00 - 2 Q alpha s0) b^i`
pub fn spray_ab<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<SprayOutput> {
    let d = beta_derivatives(m, t)?;
    let pj = phi_jet_of(m, &d)?;
    let gbar = gbar_of(&d);
    let a = d.alpha;
    let w = d.r00 - 2.0 * pj.q * a * d.s0;
    let tt: Vec<f64> = (0..d.y.len())
        .map(|i| a * pj.q * d.s_up0[i] + pj.theta * w * d.y[i] / a + pj.psi * w * d.b_up[i])
        .collect();
    let g = gbar.iter().zip(&tt).map(|(a, b)| a + b).collect();
    Ok(SprayOutput {
        g,
        gbar,
        t: tt,
        pipeline: Pipeline::Alphabeta,
    })
}

/// Curvature data of `F` at one `(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureOutput {
    pub pipeline: Pipeline,
    pub f: f64,
    pub spray: Vec<f64>,
    /// `R^i_k`
    pub r: Mat<f64>,
    pub ric: f64,
    pub ric_tensor: Option<Mat<f64>>,
    pub h: Option<Mat<f64>>,
    pub rt: Option<Mat<f64>>,
    /// `a_jm y^m / alpha`
    pub l_low: Vec<f64>,
    /// `F_{y^i}`
    pub fl_low: Vec<f64>,
    /// Fundamental tensor at `(x, y)`.
    pub g: Mat<f64>,
}

/// Ricci tensor and `H` from `R^i_k` carried as jets over `y`.
fn ricci_from_r_jets(r: &Mat<Jet2<f64>>) -> (Mat<f64>, Mat<f64>) {
    let n = r.len();
    // R^m_{i m j} = 1/3 {R^m_m,_{y^j y^i} - R^m_j,_{y^m y^i}}
    let rim = |i: usize, j: usize| -> f64 {
        (0..n)
            .map(|mm| r[mm][mm].dd(j, i) - r[mm][j].dd(mm, i))
            .sum::<f64>()
            / 3.0
    };
    let mut ric_t = vec![vec![0.0; n]; n];
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            ric_t[i][j] = 0.5 * (rim(i, j) + rim(j, i));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let ric_yy: f64 = (0..n).map(|mm| r[mm][mm].dd(i, j)).sum();
            h[i][j] = ric_t[i][j] - 0.5 * ric_yy;
        }
    }
    (ric_t, h)
}

/// Computes `R^i_k` and `Ric` by the selected pipeline. With
/// `ricci_tensor`, the generic pipeline also carries a third jet level over
/// `y` and fills `Ric_ij` and `H_ij`.
pub fn riemann_curvature<G: ChartGeometry>(
    m: &ABMetric<G>,
    t: &TangentSample,
    pipeline: Pipeline,
    ricci_tensor: bool,
) -> Result<CurvatureOutput> {
    let n = m.dim();
    let ft = crate::metric::fundamental_tensor(m, t)?;
    let (alpha, _) = m.alpha_s(&t.x, &t.y)?;
    let a = m.geometry.metric(&t.x)?.a;
    let l_low: Vec<f64> = linalg::mat_vec(&a, &t.y).into_iter().map(|v| v / alpha).collect();
    let fl_low = {
        let x: Vec<Jet2<f64>> = t.x.iter().map(|&v| Jet2::constant(v)).collect();
        let y: Vec<Jet2<f64>> = t.y.iter().enumerate().map(|(k, &v)| Jet2::variable(v, k, n)).collect();
        let f = m.finsler(&x, &y)?;
        (0..n).map(|k| f.d(k)).collect::<Vec<_>>()
    };
    let f = m.finsler(&t.x, &t.y)?;

    let (spray, r, ric_tensor, h, rt) = match pipeline {
        Pipeline::Generic if ricci_tensor => {
            let x: Vec<Jet2<f64>> = t.x.iter().map(|&v| Jet2::constant(v)).collect();
            let y: Vec<Jet2<f64>> = t.y.iter().enumerate().map(|(k, &v)| Jet2::variable(v, k, n)).collect();
            let gj = generic_spray_levels(m, &x, &y)?;
            let rj = riemann_from_spray(&gj, &y);
            let (ric_t, h) = ricci_from_r_jets(&rj);
            let r = rj.iter().map(|row| row.iter().map(|v| *v.value()).collect()).collect();
            let spray = gj.iter().map(|v| *v.value().value()).collect();
            (spray, r, Some(ric_t), Some(h), None)
        }
        Pipeline::Generic => {
            let gj = generic_spray_levels(m, &t.x, &t.y)?;
            let r = riemann_from_spray(&gj, &t.y);
            (gj.iter().map(|v| *v.value()).collect(), r, None, None, None)
        }
        Pipeline::Alphabeta => {
            let ac = riemannian::alpha_curvature(m, t)?;
            let rt = rt_tensor(m, t)?;
            let r = (0..n)
                .map(|i| (0..n).map(|j| ac.rbar[i][j] + rt[i][j]).collect())
                .collect();
            (spray_ab(m, t)?.g, r, None, None, Some(rt))
        }
    };
    let ric = (0..n).map(|i| r[i][i]).sum();
    Ok(CurvatureOutput {
        pipeline,
        f,
        spray,
        r,
        ric,
        ric_tensor,
        h,
        rt,
        l_low,
        fl_low,
        g: ft.g,
    })
}

/// `RT^i_j`, the non-Riemannian part of `R^i_j` for Killing `beta` of
/// constant length.
pub fn rt_tensor<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<Mat<f64>> {
    let d = beta_derivatives(m, t)?;
    let pj = phi_jet_of(m, &d)?;
    Ok(rt_from(&d, &pj))
}

pub fn rt_from(d: &BetaDerivatives, pj: &PhiJet) -> Mat<f64> {
    let n = d.y.len();
    let a = d.alpha;
    let l: Vec<f64> = linalg::mat_vec(&d.a, &d.y).into_iter().map(|v| v / a).collect();
    let s_0j: Vec<f64> = d.s_i0.iter().map(|v| -v).collect();
    let ss0: Vec<f64> = linalg::mat_vec(&d.s_up, &d.s_up0);
    let ss = linalg::mat_mul(&d.s_up, &d.s_up);
    let s0j = d.s_up_0j();
    let sj0 = d.s_up_j0();
    let s00 = d.s_up_00();
    let (q, qs) = (pj.q, pj.q_s);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    pj.c331 * d.s_up0[i] * s_0j[j]
                        + a * pj.c332 * ss0[i] * l[j]
                        + a * pj.c333 * ss0[i] * d.b_low[j]
                        - q * q * a * a * ss[i][j]
                        + 2.0 * q * a * s0j[i][j]
                        - q * a * sj0[i][j]
                        + pj.c311 * s00[i] * l[j]
                        - qs * s00[i] * d.b_low[j]
                })
                .collect()
        })
        .collect()
}

/// `Ric = Ricbar + s_{0m} s^m_0 c19 + alpha s^m_{0;m} c24 + alpha^2 s^i_m s^m_i c26`
pub fn ricci_killing_formula<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<f64> {
    let d = beta_derivatives(m, t)?;
    let pj = phi_jet_of(m, &d)?;
    let ric_bar = riemannian::alpha_curvature(m, t)?.ric_bar;
    Ok(ricci_killing_from(ric_bar, &d, &pj))
}

pub fn ricci_killing_from(ric_bar: f64, d: &BetaDerivatives, pj: &PhiJet) -> f64 {
    let a = d.alpha;
    ric_bar + d.s0m_sm0 * pj.c19 + a * d.div_s0 * pj.c24 + a * a * d.sisj_trace * pj.c26
}

/// Flag curvature `K(y, u)` from a curvature record at `(x, y)`.
pub fn flag_curvature_from(c: &CurvatureOutput, y: &[f64], u: &[f64]) -> Result<f64> {
    let ru = linalg::mat_vec(&c.r, u);
    let num = linalg::bilinear(&c.g, &ru, u);
    let gyy = linalg::bilinear(&c.g, y, y);
    let guu = linalg::bilinear(&c.g, u, u);
    let gyu = linalg::bilinear(&c.g, y, u);
    let gram = gyy * guu - gyu * gyu;
    if gram <= 1e-10 * (gyy * guu).max(1.0) {
        return Err(Error::DegenerateFlag { gram });
    }
    Ok(num / gram)
}

/// Flag curvature with flagpole `t.y` and transverse edge `u`.
pub fn flag_curvature<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample, u: &[f64]) -> Result<f64> {
    let c = riemann_curvature(m, t, Pipeline::Generic, false)?;
    flag_curvature_from(&c, &t.y, u)
}

/// Busemann-Hausdorff volume data and the S-curvature at one `(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct SCurvContext {
    pub sigma_f: f64,
    pub s: f64,
    /// `1/2 [dG^m/dy^m]_{y^i y^j}`
    pub e: Option<Mat<f64>>,
    /// Set when the two quadrature resolutions disagree by more than 1e-4.
    pub warning: Option<String>,
}

/// Quadrature resolution `(polar, azimuth)` for the fiber sphere.
pub const DEFAULT_FIBER_GRID: (usize, usize) = (64, 128);
const SIGMA_STEP: f64 = 1e-4;

/// `sigma_F(x) = Vol(B^n) / Vol{F < 1}`, `Vol{F < 1} = (1/n) int F^{-n} dOmega`.
pub fn sigma_f<G: ChartGeometry>(m: &ABMetric<G>, x: &[f64], grid: &SphereGrid) -> Result<f64> {
    let n = m.dim();
    let mut vol = 0.0;
    for (u, w) in grid.dirs.iter().zip(&grid.weights) {
        let f = match &m.phi {
            // the margin left by the solver would otherwise leave holes in the fiber
            PhiSpec::Numeric(sol) => {
                let (alpha, s) = m.alpha_s(x, u)?;
                alpha * sol.eval_extended(s)?
            }
            _ => m.finsler(x, u)?,
        };
        if !(f > 0.0) {
            return Err(Error::NonPositiveFiber);
        }
        vol += w * f.powi(-(n as i32));
    }
    Ok(unit_ball_volume(n) / (vol / n as f64))
}

/// `S = dG^m/dy^m - y^m d/dx^m [ln sigma_F]`
pub fn s_curvature<G: ChartGeometry>(
    m: &ABMetric<G>,
    t: &TangentSample,
    resolution: (usize, usize),
    with_e: bool,
) -> Result<SCurvContext> {
    let n = m.dim();
    let grid = SphereGrid::new(n, resolution.0, resolution.1);
    let fine = SphereGrid::new(n, 2 * resolution.0, 2 * resolution.1);
    let sigma = sigma_f(m, &t.x, &grid)?;
    let sigma_fine = sigma_f(m, &t.x, &fine)?;
    let warning = ((sigma - sigma_fine).abs() > 1e-4 * sigma_fine.abs())
        .then(|| format!("fiber quadrature not converged: sigma {sigma} vs {sigma_fine}"));

    let mut dlog = vec![0.0; n];
    for (k, dk) in dlog.iter_mut().enumerate() {
        let mut xp = t.x.clone();
        let mut xm = t.x.clone();
        xp[k] += SIGMA_STEP;
        xm[k] -= SIGMA_STEP;
        *dk = (sigma_f(m, &xp, &grid)?.ln() - sigma_f(m, &xm, &grid)?.ln()) / (2.0 * SIGMA_STEP);
    }

    let (div, e) = if with_e {
        let x: Vec<Jet2<f64>> = t.x.iter().map(|&v| Jet2::constant(v)).collect();
        let y: Vec<Jet2<f64>> = t.y.iter().enumerate().map(|(k, &v)| Jet2::variable(v, k, n)).collect();
        let gj = generic_spray_levels(m, &x, &y)?;
        let mut div = Jet2::constant(0.0);
        for (mm, g) in gj.iter().enumerate() {
            div += g.d(n + mm);
        }
        let e = (0..n)
            .map(|i| (0..n).map(|j| 0.5 * div.dd(i, j)).collect())
            .collect();
        (*div.value(), Some(e))
    } else {
        let gj = generic_spray_levels(m, &t.x, &t.y)?;
        ((0..n).map(|mm| gj[mm].d(n + mm)).sum(), None)
    };
    let s = div - linalg::dot(&t.y, &dlog);
    Ok(SCurvContext {
        sigma_f: sigma,
        s,
        e,
        warning,
    })
}

/// Ensures the profile is evaluable; used by samplers to avoid singular `s`.
pub fn phi_admissible<P: PhiFunction>(phi: &P, s: f64) -> bool {
    phi.phi(&s).map(|v| v > 0.0).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FlatChart, PhiSpec};

    #[test]
    fn flat_riemannian_spray_vanishes() {
        let m = ABMetric::new(FlatChart::euclidean(3), PhiSpec::Riemannian);
        let t = TangentSample::new([0.1, 0.2, 0.3], [1.0, -0.5, 0.25]);
        let sp = spray_generic(&m, &t).unwrap();
        assert!(sp.g.iter().all(|v| v.abs() < 1e-15));
        let c = riemann_curvature(&m, &t, Pipeline::Generic, true).unwrap();
        assert!(linalg::max_abs(&c.r) < 1e-14);
        assert!(linalg::max_abs(c.h.as_ref().unwrap()) < 1e-14);
    }

    #[test]
    fn minkowski_randers_is_flat() {
        let chart = FlatChart::euclidean(3).with_constant_b(vec![0.3, 0.1, 0.0]);
        let m = ABMetric::new(chart, PhiSpec::Randers);
        let t = TangentSample::new([0.0; 3], [0.3, 1.0, -0.2]);
        let c = riemann_curvature(&m, &t, Pipeline::Generic, false).unwrap();
        assert!(linalg::max_abs(&c.r) < 1e-13);
        let s = s_curvature(&m, &t, (16, 32), false).unwrap();
        assert!(s.s.abs() < 1e-8);
        assert!(s.sigma_f > 0.0 && s.warning.is_none());
    }

    #[test]
    fn generic_and_ab_sprays_agree_on_non_killing_form() {
        let mut chart = FlatChart::euclidean(3);
        chart.b0 = vec![0.1, 0.05, 0.0];
        chart.b_lin[0][0] = 0.2;
        chart.b_lin[1][2] = 0.1;
        chart.b_quad[2][0][1] = 0.15;
        let m = ABMetric::new(chart, PhiSpec::RandersType { k1: 1.0, k2: 0.3, k3: 0.5 });
        let t = TangentSample::new([0.2, -0.1, 0.3], [0.7, 0.4, -0.5]);
        let a = spray_generic(&m, &t).unwrap();
        let b = spray_ab(&m, &t).unwrap();
        let d = beta_derivatives(&m, &t).unwrap();
        assert!(d.r00.abs() > 1e-3);
        for i in 0..3 {
            assert!((a.g[i] - b.g[i]).abs() < 1e-12, "{:?} vs {:?}", a.g, b.g);
        }
    }
}
