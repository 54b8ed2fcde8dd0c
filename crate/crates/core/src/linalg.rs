//! Small dense linear algebra written against [`Scalar`].

use crate::error::{Error, Result};
use crate::jet::Scalar;

pub type Mat<T> = Vec<Vec<T>>;

pub fn zeros<T: Scalar>(rows: usize, cols: usize) -> Mat<T> {
    vec![vec![T::cst(0.0); cols]; rows]
}

/// Inverse and determinant (of the base values) by Gauss-Jordan elimination
/// with partial pivoting. Fails when `|det| < rel_tol * scale^n`, where
/// `scale` is the largest entry magnitude.
pub fn invert<T: Scalar>(m: &Mat<T>, rel_tol: f64) -> Result<(Mat<T>, f64)> {
    let n = m.len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|v| v.re().abs()))
        .fold(0.0_f64, f64::max);
    let mut a: Mat<T> = m.clone();
    let mut inv: Mat<T> = zeros(n, n);
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = T::cst(1.0);
    }
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].re().abs().total_cmp(&a[q][col].re().abs()))
            .unwrap();
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= p.re();
        if p.re() == 0.0 {
            return Err(Error::DegenerateMetric { det: 0.0 });
        }
        let pinv = p.recip()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul_ref(&pinv);
            inv[col][j] = inv[col][j].mul_ref(&pinv);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                let t = factor.mul_ref(&a[col][j]);
                a[r][j] = a[r][j].sub_ref(&t);
                let t = factor.mul_ref(&inv[col][j]);
                inv[r][j] = inv[r][j].sub_ref(&t);
            }
        }
    }
    if det.abs() < rel_tol * scale.powi(n as i32) {
        return Err(Error::DegenerateMetric { det });
    }
    Ok((inv, det))
}

pub fn mat_vec<T: Scalar>(m: &Mat<T>, v: &[T]) -> Vec<T> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(T::cst(0.0), |acc, (a, b)| acc + a.mul_ref(b))
        })
        .collect()
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::cst(0.0), |acc, (x, y)| acc + x.mul_ref(y))
}

/// `v^T m w`
pub fn bilinear<T: Scalar>(m: &Mat<T>, v: &[T], w: &[T]) -> T {
    dot(v, &mat_vec(m, w))
}

pub fn max_abs(m: &Mat<f64>) -> f64 {
    m.iter().flat_map(|r| r.iter()).fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn mat_mul<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            for p in 0..k {
                out[i][j] += a[i][p].mul_ref(&b[p][j]);
            }
        }
    }
    out
}

pub fn transpose(a: &Mat<f64>) -> Mat<f64> {
    let (n, m) = (a.len(), a[0].len());
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_spd_matrix() {
        let m = vec![vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]];
        let (inv, det) = invert(&m, 1e-12).unwrap();
        let id = mat_mul(&m, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - e).abs() < 1e-14);
            }
        }
        let expect = 4.0 * (6.0 - 0.04) - 1.0 * (2.0 - 0.1) + 0.5 * (0.2 - 1.5);
        assert!((det - expect).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = vec![vec![1.0, 2.0], vec![2.0, 4.0 + 1e-15]];
        assert!(matches!(invert(&m, 1e-12), Err(Error::DegenerateMetric { .. })));
    }
}
