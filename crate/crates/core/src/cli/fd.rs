//! Finite-difference spray from values of `F^2` only, used as an oracle
//! column next to the jet results.

use crate::error::Result;
use crate::linalg;
use crate::metric::{ABMetric, ChartGeometry, TangentSample, SINGULAR_TOL};

const STEP: f64 = 1e-4;

/// `G^i = 1/4 g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})`, all partials by
/// central differences.
pub fn spray_fd<G: ChartGeometry>(m: &ABMetric<G>, t: &TangentSample) -> Result<Vec<f64>> {
    let n = m.dim();
    let f2 = |x: &[f64], y: &[f64]| m.f_squared(x, y);
    let h = STEP;
    // z = (x, y); second partial in slots p, q
    let eval = |dp: (usize, f64), dq: (usize, f64)| -> Result<f64> {
        let mut z: Vec<f64> = t.x.iter().chain(&t.y).copied().collect();
        z[dp.0] += dp.1;
        z[dq.0] += dq.1;
        f2(&z[..n], &z[n..])
    };
    let second = |p: usize, q: usize| -> Result<f64> {
        Ok((eval((p, h), (q, h))? - eval((p, h), (q, -h))? - eval((p, -h), (q, h))? + eval((p, -h), (q, -h))?) / (4.0 * h * h))
    };
    let first = |p: usize| -> Result<f64> { Ok((eval((p, h), (p, 0.0))? - eval((p, -h), (p, 0.0))?) / (2.0 * h)) };

    let mut g = linalg::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[i][j] = 0.5 * second(n + i, n + j)?;
        }
    }
    let (g_inv, _) = linalg::invert(&g, SINGULAR_TOL)?;
    let mut rhs = vec![0.0; n];
    for (l, r) in rhs.iter_mut().enumerate() {
        let mut acc = -first(l)?;
        for k in 0..n {
            acc += second(k, n + l)? * t.y[k];
        }
        *r = 0.25 * acc;
    }
    Ok(linalg::mat_vec(&g_inv, &rhs))
}
