//! Berger spheres in the hemisphere chart of unit quaternions.
//!
//! A chart point `v` (with `|v| < 1`) stands for `q = (w, v)`,
//! `w = sqrt(1 - |v|^2)`. The right-invariant forms `eta^a` are the
//! imaginary components of `dq q^{-1}`; they satisfy `d eta^1 = 2 eta^2 ^ eta^3`
//! and cyclic permutations. Scaling `eta^1` by `1 + eps` and the other two
//! by `sqrt(1 + eps)` gives the orthonormal coframe `theta` of `alpha`, and
//! `beta = b theta^1` with `b = sqrt(eps / (1 + eps))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{Jet2, Scalar};
use crate::linalg::{self, Mat};
use crate::metric::{ABMetric, ChartData, ChartGeometry, PhiJet, PhiSpec, SINGULAR_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BergerSphere {
    pub epsilon: f64,
    pub b: f64,
    pub lambda: f64,
}

/// `eps >= 0` gives `b = sqrt(eps / (1 + eps))` and `lambda = 1 - 4 b^2`.
pub fn make_berger(epsilon: f64) -> Result<BergerSphere> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Invalid(format!("Berger parameter must be >= 0, got {epsilon}")));
    }
    let b = (epsilon / (1.0 + epsilon)).sqrt();
    Ok(BergerSphere {
        epsilon,
        b,
        lambda: 1.0 - 4.0 * b * b,
    })
}

/// `eta[a][i]`: component of `eta^a` along `dv^i`.
pub fn coframe<T: Scalar>(v: &[T]) -> Result<Mat<T>> {
    let r2 = v[0].square() + v[1].square() + v[2].square();
    if r2.re() >= 1.0 {
        return Err(Error::OutOfChart { norm: r2.re().sqrt() });
    }
    let w = (T::cst(1.0) - r2).sqrt()?;
    let w_inv = w.recip()?;
    // Im(dq_i qbar) = (v_i / w) v + w e_i - e_i x v
    let mut eta = linalg::zeros(3, 3);
    for i in 0..3 {
        let vi_w = v[i].mul_ref(&w_inv);
        for a in 0..3 {
            let mut e = vi_w.mul_ref(&v[a]);
            if a == i {
                e += w.clone();
            }
            // (e_i x v)_a = eps_{a i c} v_c
            if a != i {
                let c = 3 - a - i;
                let sign = if (a + 1) % 3 == i { 1.0 } else { -1.0 };
                e = e - v[c].scale(sign);
            }
            eta[a][i] = e;
        }
    }
    Ok(eta)
}

impl BergerSphere {
    fn scales(&self) -> [f64; 3] {
        let r = (1.0 + self.epsilon).sqrt();
        [1.0 + self.epsilon, r, r]
    }

    /// `theta[a][i]`: orthonormal coframe of `alpha`.
    pub fn theta<T: Scalar>(&self, v: &[T]) -> Result<Mat<T>> {
        let mut eta = coframe(v)?;
        for (row, c) in eta.iter_mut().zip(self.scales()) {
            for e in row.iter_mut() {
                *e = e.scale(c);
            }
        }
        Ok(eta)
    }

    pub fn with_phi(self, phi: PhiSpec) -> ABMetric<Self> {
        ABMetric::new(self, phi)
    }

    /// `yhat^a = theta^a_i y^i`
    pub fn frame_components(&self, v: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        Ok(linalg::mat_vec(&self.theta(v)?, y))
    }

    /// Chart components of the frame vector `yhat`.
    pub fn chart_components(&self, v: &[f64], yhat: &[f64]) -> Result<Vec<f64>> {
        let (inv, _) = linalg::invert(&self.theta(v)?, SINGULAR_TOL)?;
        Ok(linalg::mat_vec(&inv, yhat))
    }

    /// `theta R theta^{-1}` for a (1,1)-tensor `R^i_k`.
    pub fn frame_mixed(&self, v: &[f64], r: &Mat<f64>) -> Result<Mat<f64>> {
        let th = self.theta(v)?;
        let (inv, _) = linalg::invert(&th, SINGULAR_TOL)?;
        Ok(linalg::mat_mul(&linalg::mat_mul(&th, r), &inv))
    }

    /// `theta^{-T} B theta^{-1}` for a covariant 2-tensor `B_ij`.
    pub fn frame_covariant(&self, v: &[f64], bij: &Mat<f64>) -> Result<Mat<f64>> {
        let (inv, _) = linalg::invert(&self.theta(v)?, SINGULAR_TOL)?;
        Ok(linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&inv), bij), &inv))
    }
}

impl ChartGeometry for BergerSphere {
    fn dim(&self) -> usize {
        3
    }

    fn metric<T: Scalar>(&self, x: &[T]) -> Result<ChartData<T>> {
        let th = self.theta(x)?;
        let mut a = linalg::zeros(3, 3);
        for i in 0..3 {
            for j in i..3 {
                let mut acc = T::cst(0.0);
                for row in &th {
                    acc += row[i].mul_ref(&row[j]);
                }
                a[i][j] = acc.clone();
                a[j][i] = acc;
            }
        }
        let b = th[0].iter().map(|t| t.scale(self.b)).collect();
        Ok(ChartData { a, b })
    }

    fn constant_b_len(&self) -> Option<f64> {
        Some(self.b)
    }
}

/// Exterior derivative `(d omega)_{ij} = d_i omega_j - d_j omega_i` of the
/// rows of a coframe-valued function, returned per row.
fn exterior_derivative(f: impl Fn(&[Jet2<f64>]) -> Result<Mat<Jet2<f64>>>, v: &[f64]) -> Result<(Mat<f64>, Vec<Mat<f64>>)> {
    let xs: Vec<Jet2<f64>> = v.iter().enumerate().map(|(i, &x)| Jet2::variable(x, i, 3)).collect();
    let th = f(&xs)?;
    let val = th.iter().map(|r| r.iter().map(|e| *e.value()).collect()).collect();
    let d = th
        .iter()
        .map(|row| {
            (0..3)
                .map(|i| (0..3).map(|j| row[j].d(i) - row[i].d(j)).collect())
                .collect()
        })
        .collect();
    Ok((val, d))
}

fn wedge(a: &[f64], b: &[f64]) -> Mat<f64> {
    (0..3)
        .map(|i| (0..3).map(|j| a[i] * b[j] - a[j] * b[i]).collect())
        .collect()
}

/// `max |d eta^a - 2 eta^b ^ eta^c|` over cyclic `(a, b, c)` at `v`.
pub fn structure_equation_residual(v: &[f64]) -> Result<f64> {
    let (eta, d) = exterior_derivative(|x| coframe(x), v)?;
    let mut worst = 0.0_f64;
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let w = wedge(&eta[b], &eta[c]);
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((d[a][i][j] - 2.0 * w[i][j]).abs());
            }
        }
    }
    Ok(worst)
}

impl BergerSphere {
    /// Connection forms `omega[j][i] = theta_j^i` in terms of `theta`, as
    /// coefficient rows: `theta_2^1 = theta^3`, `theta_3^1 = -theta^2`,
    /// `theta_3^2 = (1 - eps)/(1 + eps) theta^1`, antisymmetric in `(i, j)`.
    fn connection_forms(&self, th: &Mat<f64>) -> Vec<Vec<Vec<f64>>> {
        let c = (1.0 - self.epsilon) / (1.0 + self.epsilon);
        let zero = vec![0.0; 3];
        let sc = |k: usize, s: f64| th[k].iter().map(|v| v * s).collect::<Vec<f64>>();
        let mut w = vec![vec![zero.clone(); 3]; 3];
        w[1][0] = sc(2, 1.0);
        w[0][1] = sc(2, -1.0);
        w[2][0] = sc(1, -1.0);
        w[0][2] = sc(1, 1.0);
        w[2][1] = sc(0, c);
        w[1][2] = sc(0, -c);
        w
    }

    /// `max |d theta^i - theta^j ^ theta_j^i|` at `v`.
    pub fn connection_form_residual(&self, v: &[f64]) -> Result<f64> {
        let (th, d) = exterior_derivative(|x| self.theta(x), v)?;
        let w = self.connection_forms(&th);
        let mut worst = 0.0_f64;
        for i in 0..3 {
            let mut rhs = vec![vec![0.0; 3]; 3];
            for j in 0..3 {
                let wj = wedge(&th[j], &w[j][i]);
                for p in 0..3 {
                    for q in 0..3 {
                        rhs[p][q] += wj[p][q];
                    }
                }
            }
            for p in 0..3 {
                for q in 0..3 {
                    worst = worst.max((d[i][p][q] - rhs[p][q]).abs());
                }
            }
        }
        Ok(worst)
    }

    /// Closed-form values at a frame direction `yhat`.
    pub fn expected_quantities(&self, yhat: &[f64], pj: Option<&PhiJet>) -> Expected {
        let b = self.b;
        let [y1, y2, y3] = [yhat[0], yhat[1], yhat[2]];
        let a2 = y1 * y1 + y2 * y2 + y3 * y3;
        let alpha = a2.sqrt();
        let beta = b * y1;
        let perp = y2 * y2 + y3 * y3;
        let lam = self.lambda;
        let rbar_diag = [perp, y1 * y1 + lam * y3 * y3, y1 * y1 + lam * y2 * y2];
        let (r11, rt) = match pj {
            Some(p) => {
                let (q, qs) = (p.q, p.q_s);
                let (c331, c332, c333, c311) = (p.c331, p.c332, p.c333, p.c311);
                let ai = 1.0 / alpha;
                let rt = vec![
                    vec![
                        -b * ai * perp * (c311 * y1 - qs * b * alpha),
                        -b * ai * y2 * (q * a2 + perp * c311),
                        -b * ai * y3 * (q * a2 + perp * c311),
                    ],
                    vec![
                        -b * alpha * y2 * (c333 * b * b + q) + b * ai * y1 * y2 * (c311 * y1 - qs * alpha * b - b * c332 * alpha),
                        -b * b * (c331 * y3 * y3 + c332 * y2 * y2) + b * b * q * q * a2 + 2.0 * b * q * alpha * y1 + c311 * b * ai * y1 * y2 * y2,
                        b * b * (c331 - c332) * y2 * y3 + b * ai * c311 * y1 * y2 * y3,
                    ],
                    vec![
                        -b * alpha * y3 * (c333 * b * b + q) + b * ai * y1 * y3 * (c311 * y1 - qs * alpha * b - b * c332 * alpha),
                        b * b * (c331 - c332) * y2 * y3 + b * ai * c311 * y1 * y2 * y3,
                        -b * b * (c331 * y2 * y2 + c332 * y3 * y3) + b * b * q * q * a2 + 2.0 * q * b * alpha * y1 + b * ai * c311 * y1 * y3 * y3,
                    ],
                ];
                let s = p.s;
                (Some((1.0 + s * q + (b * b - s * s) * qs) * perp), Some(rt))
            }
            None => (None, None),
        };
        Expected {
            alpha2: a2,
            beta,
            ric_bar: 2.0 * a2 - 4.0 * (b * b * a2 - beta * beta),
            s0m_sm0: -(b * b * a2 - beta * beta),
            div_s0: 2.0 * beta,
            sisj_trace: -2.0 * b * b,
            s_up0: [0.0, -b * y3, b * y2],
            rbar_diag,
            r11,
            rt,
        }
    }
}

/// Closed-form frame quantities for the Berger construction.
#[derive(Debug, Clone, Serialize)]
pub struct Expected {
    pub alpha2: f64,
    pub beta: f64,
    pub ric_bar: f64,
    pub s0m_sm0: f64,
    pub div_s0: f64,
    pub sisj_trace: f64,
    /// `s^a_0` in frame components
    pub s_up0: [f64; 3],
    pub rbar_diag: [f64; 3],
    pub r11: Option<f64>,
    pub rt: Option<Mat<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters() {
        let s = make_berger(1.0).unwrap();
        assert!((s.b * s.b - 0.5).abs() < 1e-15);
        assert!((s.lambda + 1.0).abs() < 1e-15);
        for eps in [0.0, 0.5, 2.0, 7.0] {
            let s = make_berger(eps).unwrap();
            assert!((s.lambda - (1.0 - 3.0 * eps) / (1.0 + eps)).abs() < 1e-14);
        }
        assert!(make_berger(-0.1).is_err());
    }

    #[test]
    fn coframe_is_identity_at_origin() {
        let eta = coframe(&[0.0, 0.0, 0.0]).unwrap();
        for a in 0..3 {
            for i in 0..3 {
                assert_eq!(eta[a][i], if a == i { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn structure_equations_hold_off_origin() {
        for v in [[0.3, -0.2, 0.4], [0.0, 0.5, 0.1], [-0.6, 0.2, -0.3]] {
            assert!(structure_equation_residual(&v).unwrap() < 1e-12);
        }
    }

    #[test]
    fn connection_forms_close() {
        for eps in [0.0, 0.5, 1.0, 2.0] {
            let s = make_berger(eps).unwrap();
            assert!(s.connection_form_residual(&[0.2, 0.1, -0.4]).unwrap() < 1e-12);
        }
    }

    #[test]
    fn out_of_chart() {
        assert!(matches!(coframe(&[0.8, 0.7, 0.0]), Err(Error::OutOfChart { .. })));
    }

    #[test]
    fn frame_roundtrip_and_beta() {
        let s = make_berger(1.0).unwrap();
        let v = [0.1, -0.3, 0.2];
        let y = [0.4, 1.0, -0.7];
        let yh = s.frame_components(&v, &y).unwrap();
        let back = s.chart_components(&v, &yh).unwrap();
        for k in 0..3 {
            assert!((back[k] - y[k]).abs() < 1e-14);
        }
        let data = s.metric(&v).unwrap();
        let a2 = linalg::bilinear(&data.a, &y, &y);
        assert!((a2 - yh.iter().map(|c| c * c).sum::<f64>()).abs() < 1e-13);
        assert!((linalg::dot(&data.b, &y) - s.b * yh[0]).abs() < 1e-14);
    }

    #[test]
    fn expected_at_unit_y2() {
        let s = make_berger(1.0).unwrap();
        let e = s.expected_quantities(&[0.0, 1.0, 0.0], None);
        assert!((e.s0m_sm0 + 0.5).abs() < 1e-15);
        assert!((e.sisj_trace + 1.0).abs() < 1e-15);
    }
}
