//! Levi-Civita data of `alpha`, covariant derivatives of `beta`, and the
//! Riemann curvature of `alpha` through the shared spray pipeline.

use serde::Serialize;

use crate::error::Result;
use crate::jet::{Jet2, Scalar};
use crate::linalg::{self, Mat};
use crate::metric::{ABMetric, ChartGeometry, TangentSample, SINGULAR_TOL};
use crate::spray;

/// `Gamma[i][j][k] = Gamma^i_jk`
pub type Christoffel<T> = Vec<Mat<T>>;

/// Christoffel symbols from a metric whose entries carry first
/// derivatives in `x` at seed slots `0..n`. Returns `(Gamma, a, a^{-1})`
/// at the coefficient level.
pub(crate) fn christoffel_from_jets<T: Scalar>(a: &Mat<Jet2<T>>) -> Result<(Christoffel<T>, Mat<T>, Mat<T>)> {
    let n = a.len();
    let a_val: Mat<T> = a.iter().map(|r| r.iter().map(|v| v.value().clone()).collect()).collect();
    let (a_inv, _) = linalg::invert(&a_val, SINGULAR_TOL)?;
    // first-kind symbols [jk, l]
    let mut first = vec![vec![vec![T::cst(0.0); n]; n]; n];
    for l in 0..n {
        for j in 0..n {
            for k in j..n {
                let v = (a[l][j].d(k) + a[l][k].d(j) - a[j][k].d(l)) * 0.5;
                first[l][j][k] = v.clone();
                first[l][k][j] = v;
            }
        }
    }
    let mut gamma = vec![vec![vec![T::cst(0.0); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut acc = T::cst(0.0);
                for l in 0..n {
                    acc += a_inv[i][l].mul_ref(&first[l][j][k]);
                }
                gamma[i][j][k] = acc.clone();
                gamma[i][k][j] = acc;
            }
        }
    }
    Ok((gamma, a_val, a_inv))
}

/// Levi-Civita symbols `Gamma^i_jk` of `alpha` at `x`.
pub fn christoffel<G: ChartGeometry>(m: &ABMetric<G>, x: &[f64]) -> Result<Christoffel<f64>> {
    let n = m.dim();
    let xs: Vec<Jet2<f64>> = x.iter().enumerate().map(|(i, &v)| Jet2::variable(v, i, n)).collect();
    let data = m.geometry.metric(&xs)?;
    Ok(christoffel_from_jets(&data.a)?.0)
}

/// Covariant derivatives of `beta` at a point, with contractions at `y`.
#[derive(Debug, Clone, Serialize)]
pub struct BetaDerivatives {
    pub a: Mat<f64>,
    pub a_inv: Mat<f64>,
    pub christoffel: Christoffel<f64>,
    pub b_low: Vec<f64>,
    pub b_up: Vec<f64>,
    /// `b_{i;j}`
    pub bcov: Mat<f64>,
    pub r: Mat<f64>,
    pub s_a: Mat<f64>,
    /// `s^i_j = a^{im} s_mj`
    pub s_up: Mat<f64>,
    pub r_vec: Vec<f64>,
    pub s_vec: Vec<f64>,
    /// `s_{ij;k}` as `[i][j][k]`
    pub s_cov: Vec<Mat<f64>>,
    /// `s^i_{j;k}` as `[i][j][k]`
    pub s_up_cov: Vec<Mat<f64>>,
    pub y: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// `s_{i0} = s_ij y^j`
    pub s_i0: Vec<f64>,
    /// `s^i_0`
    pub s_up0: Vec<f64>,
    /// `s_{0m} s^m_0`
    pub s0m_sm0: f64,
    /// `s^i_m s^m_i`
    pub sisj_trace: f64,
    /// `s^m_{0;m}`
    pub div_s0: f64,
    pub r00: f64,
    /// `s_0 = s_j y^j`
    pub s0: f64,
}

impl BetaDerivatives {
    /// `s^i_{0|j} = s^i_{k;j} y^k`
    pub fn s_up_0j(&self) -> Mat<f64> {
        let n = self.y.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.s_up_cov[i][k][j] * self.y[k]).sum()).collect())
            .collect()
    }

    /// `s^i_{j|0} = s^i_{j;k} y^k`
    pub fn s_up_j0(&self) -> Mat<f64> {
        let n = self.y.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.s_up_cov[i][j][k] * self.y[k]).sum()).collect())
            .collect()
    }

    /// `s^i_{0|0}`
    pub fn s_up_00(&self) -> Vec<f64> {
        self.s_up_0j().iter().map(|row| linalg::dot(row, &self.y)).collect()
    }

    /// Largest entry over `a`, `b` and the direction, floored at one.
    pub fn scale(&self) -> f64 {
        let m = linalg::max_abs(&self.a)
            .max(self.b_low.iter().fold(0.0_f64, |a, v| a.max(v.abs())))
            .max(self.y.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
        m.max(1.0)
    }
}

pub fn beta_derivatives<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<BetaDerivatives> {
    let n = m.dim();
    // outer and inner levels both over x
    let xs: Vec<Jet2<Jet2<f64>>> = t
        .x
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet2::variable(Jet2::variable(v, i, n), i, n))
        .collect();
    let data = m.geometry.metric(&xs)?;
    let (gamma_j, a_j, a_inv_j) = christoffel_from_jets(&data.a)?;
    let b_j: Vec<Jet2<f64>> = data.b.iter().map(|v| v.value().clone()).collect();

    // b_{i;j} with one x-derivative left
    let mut bcov_j: Mat<Jet2<f64>> = linalg::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = data.b[i].d(j);
            for mm in 0..n {
                v = v - b_j[mm].mul_ref(&gamma_j[mm][i][j]);
            }
            bcov_j[i][j] = v;
        }
    }
    let s_j: Mat<Jet2<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (bcov_j[i][j].sub_ref(&bcov_j[j][i])) * 0.5).collect())
        .collect();
    let s_up_j: Mat<Jet2<f64>> = linalg::mat_mul(&a_inv_j, &s_j);

    let re = |mm: &Mat<Jet2<f64>>| -> Mat<f64> { mm.iter().map(|r| r.iter().map(|v| *v.value()).collect()).collect() };
    let a = re(&a_j);
    let a_inv = re(&a_inv_j);
    let christoffel: Christoffel<f64> = gamma_j.iter().map(&re).collect();
    let bcov = re(&bcov_j);
    let s_a = re(&s_j);
    let s_up = re(&s_up_j);
    let b_low: Vec<f64> = b_j.iter().map(|v| *v.value()).collect();
    let b_up = linalg::mat_vec(&a_inv, &b_low);
    let r: Mat<f64> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (bcov[i][j] + bcov[j][i])).collect())
        .collect();
    let r_vec: Vec<f64> = (0..n).map(|j| (0..n).map(|mm| b_up[mm] * r[mm][j]).sum()).collect();
    let s_vec: Vec<f64> = (0..n).map(|j| (0..n).map(|mm| b_up[mm] * s_a[mm][j]).sum()).collect();

    let g = &christoffel;
    let mut s_cov = vec![vec![vec![0.0; n]; n]; n];
    let mut s_up_cov = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = s_j[i][j].d(k);
                let mut w = s_up_j[i][j].d(k);
                for l in 0..n {
                    v -= g[l][i][k] * s_a[l][j] + g[l][j][k] * s_a[i][l];
                    w += g[i][k][l] * s_up[l][j] - g[l][k][j] * s_up[i][l];
                }
                s_cov[i][j][k] = v;
                s_up_cov[i][j][k] = w;
            }
        }
    }

    let y = t.y.clone();
    let alpha2 = linalg::bilinear(&a, &y, &y);
    let alpha = alpha2.sqrt();
    let beta = linalg::dot(&b_low, &y);
    let s_i0 = linalg::mat_vec(&s_a, &y);
    let s_up0 = linalg::mat_vec(&s_up, &y);
    // s_{0m} = -s_{m0}
    let s0m_sm0 = -linalg::dot(&s_i0, &s_up0);
    let sisj_trace = (0..n).map(|i| (0..n).map(|mm| s_up[i][mm] * s_up[mm][i]).sum::<f64>()).sum();
    let div_s0 = (0..n)
        .map(|mm| (0..n).map(|k| s_up_cov[mm][k][mm] * y[k]).sum::<f64>())
        .sum();
    let r00 = linalg::bilinear(&r, &y, &y);
    let s0 = linalg::dot(&s_vec, &y);
    Ok(BetaDerivatives {
        a,
        a_inv,
        christoffel,
        b_low,
        b_up,
        bcov,
        r,
        s_a,
        s_up,
        r_vec,
        s_vec,
        s_cov,
        s_up_cov,
        y,
        alpha,
        beta,
        s_i0,
        s_up0,
        s0m_sm0,
        sisj_trace,
        div_s0,
        r00,
        s0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KillingReport {
    pub killing: bool,
    pub max_r: f64,
    pub max_s_vec: f64,
    /// Spread (max - min) of `||beta||_alpha` over the samples.
    pub b_len_spread: f64,
    pub constant_length: bool,
}

/// Checks `r_ij = 0` and `s_j = 0` over samples, relative to each sample's scale.
pub fn killing_predicate<G: ChartGeometry>(m: &ABMetric<G>, samples: &[TangentSample]) -> Result<KillingReport> {
    let (mut max_r, mut max_s, mut worst) = (0.0_f64, 0.0_f64, 0.0_f64);
    let (mut bmin, mut bmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in samples {
        let d = beta_derivatives(m, t)?;
        let sc = d.scale();
        let r = linalg::max_abs(&d.r);
        let s = d.s_vec.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        max_r = max_r.max(r);
        max_s = max_s.max(s);
        worst = worst.max(r.max(s) / sc);
        let bl = linalg::dot(&d.b_up, &d.b_low).max(0.0).sqrt();
        bmin = bmin.min(bl);
        bmax = bmax.max(bl);
    }
    let spread = if samples.is_empty() { 0.0 } else { bmax - bmin };
    let constant_length = spread < 1e-9;
    Ok(KillingReport {
        killing: !samples.is_empty() && worst < 1e-8 && constant_length,
        max_r,
        max_s_vec: max_s,
        b_len_spread: spread,
        constant_length,
    })
}

/// Riemann curvature of `alpha` at one point.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaCurvature {
    pub rbar: Mat<f64>,
    pub ric_bar: f64,
    pub christoffel: Christoffel<f64>,
}

/// Geodesic coefficients `Gbar^i = 1/2 Gamma^i_jk y^j y^k` as jets over
/// `(x, y)`, with coefficients at level `T`.
pub(crate) fn alpha_spray_levels<G: ChartGeometry, T: Scalar>(geometry: &G, x: &[T], y: &[T]) -> Result<Vec<Jet2<T>>> {
    let n = geometry.dim();
    let (xo, yo) = spray::seed_xy(x, y);
    let data = geometry.metric(&xo)?;
    let (gamma, _, _) = christoffel_from_jets(&data.a)?;
    let ym: Vec<Jet2<T>> = yo.iter().map(|v| v.value().clone()).collect();
    Ok((0..n)
        .map(|i| {
            let mut acc = Jet2::constant(T::cst(0.0));
            for j in 0..n {
                let mut row = Jet2::constant(T::cst(0.0));
                for k in 0..n {
                    row += gamma[i][j][k].mul_ref(&ym[k]);
                }
                acc += row.mul_ref(&ym[j]);
            }
            acc * 0.5
        })
        .collect())
}

pub fn alpha_curvature<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<AlphaCurvature> {
    let gbar = alpha_spray_levels(&m.geometry, &t.x, &t.y)?;
    let rbar = spray::riemann_from_spray(&gbar, &t.y);
    let ric_bar = (0..rbar.len()).map(|i| rbar[i][i]).sum();
    Ok(AlphaCurvature {
        rbar,
        ric_bar,
        christoffel: christoffel(m, &t.x)?,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SssResidual {
    /// `max |b^m s_{jm;k} + s_{jm} s^m_k|`
    pub full: f64,
    /// `max |b^i s^m_{i;m} + s^i_m s^m_i|`
    pub contracted: f64,
}

pub fn beta_s_identity_check<G: ChartGeometry>(m: &ABMetric<G>, samples: &[TangentSample]) -> Result<SssResidual> {
    let mut out = SssResidual { full: 0.0, contracted: 0.0 };
    for t in samples {
        let d = beta_derivatives(m, t)?;
        let n = d.y.len();
        for j in 0..n {
            for k in 0..n {
                let v: f64 = (0..n)
                    .map(|mm| d.b_up[mm] * d.s_cov[j][mm][k] + d.s_a[j][mm] * d.s_up[mm][k])
                    .sum();
                out.full = out.full.max(v.abs());
            }
        }
        let c: f64 = (0..n)
            .map(|i| (0..n).map(|mm| d.b_up[i] * d.s_up_cov[mm][i][mm]).sum::<f64>())
            .sum::<f64>()
            + d.sisj_trace;
        out.contracted = out.contracted.max(c.abs());
    }
    Ok(out)
}

/// `r_ij + b_i s_j + b_j s_i - 2 c (a_ij - b_i b_j)` at `x`.
pub fn randers_isotropic_s_residual<G: ChartGeometry>(m: &ABMetric<G>, c: f64, x: &[f64]) -> Result<Mat<f64>> {
    let n = m.dim();
    let d = beta_derivatives(m, &TangentSample::new(x.to_vec(), unit(n, 0)))?;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    d.r[i][j] + d.b_low[i] * d.s_vec[j] + d.b_low[j] * d.s_vec[i]
                        - 2.0 * c * (d.a[i][j] - d.b_low[i] * d.b_low[j])
                })
                .collect()
        })
        .collect())
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}
