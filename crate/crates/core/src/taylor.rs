//! Univariate truncated Taylor series.
//!
//! Used to push an ODE `phi'' = f(s, phi, phi')` to arbitrary order at a
//! point, so numerically solved profiles can be fed into the jet pipeline
//! with exact local derivatives.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::jet::{DomainError, Primitive, Scalar};

/// Coefficients `c[k]` of `sum c[k] t^k`; length fixes the truncation order.
/// A length-one series is a constant and broadcasts.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub c: Vec<f64>,
}

impl Series {
    pub fn new(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        Self { c }
    }

    /// `value + t` truncated at `order`.
    pub fn variable(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        if order >= 1 {
            c[1] = 1.0;
        }
        Self { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    fn len_with(&self, other: &Self) -> usize {
        self.c.len().max(other.c.len())
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            c: self.c.iter().map(|&a| f(a)).collect(),
        }
    }

    fn recip_unchecked(&self) -> Self {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let acc: f64 = (1..=k).map(|j| self.c[j] * b[k - j]).sum();
            b[k] = -acc / a0;
        }
        Self { c: b }
    }

    /// Taylor coefficients of `(sin, cos)` of this series.
    fn sin_cos(&self) -> (Self, Self) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..n {
            let mut sk = 0.0;
            let mut ck = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.c[j];
                sk += ja * c[k - j];
                ck -= ja * s[k - j];
            }
            s[k] = sk / k as f64;
            c[k] = ck / k as f64;
        }
        (Self { c: s }, Self { c })
    }
}

impl Scalar for Series {
    const ORDER: usize = 16;

    fn cst(c: f64) -> Self {
        Self { c: vec![c] }
    }

    fn re(&self) -> f64 {
        self.c[0]
    }

    fn sqrt(&self) -> Result<Self, DomainError> {
        let a0 = self.c[0];
        if a0 < 0.0 || (a0 == 0.0 && self.c.len() > 1) || a0.is_nan() {
            return Err(DomainError::new(Primitive::Sqrt, a0));
        }
        let n = self.c.len();
        let mut b = vec![0.0; n];
        b[0] = a0.sqrt();
        for k in 1..n {
            let acc: f64 = (1..k).map(|j| b[j] * b[k - j]).sum();
            b[k] = (self.c[k] - acc) / (2.0 * b[0]);
        }
        Ok(Self { c: b })
    }

    fn recip(&self) -> Result<Self, DomainError> {
        if self.c[0] == 0.0 || self.c[0].is_nan() {
            return Err(DomainError::new(Primitive::Recip, self.c[0]));
        }
        Ok(self.recip_unchecked())
    }

    fn ln(&self) -> Result<Self, DomainError> {
        let a0 = self.c[0];
        if a0 <= 0.0 || a0.is_nan() {
            return Err(DomainError::new(Primitive::Ln, a0));
        }
        let n = self.c.len();
        let mut b = vec![0.0; n];
        b[0] = a0.ln();
        for k in 1..n {
            let acc: f64 = (1..k).map(|j| j as f64 * b[j] * self.c[k - j]).sum();
            b[k] = (self.c[k] - acc / k as f64) / a0;
        }
        Ok(Self { c: b })
    }

    fn exp(&self) -> Self {
        let n = self.c.len();
        let mut b = vec![0.0; n];
        b[0] = self.c[0].exp();
        for k in 1..n {
            let acc: f64 = (1..=k).map(|j| j as f64 * self.c[j] * b[k - j]).sum();
            b[k] = acc / k as f64;
        }
        Self { c: b }
    }

    fn sin(&self) -> Self {
        self.sin_cos().0
    }

    fn cos(&self) -> Self {
        self.sin_cos().1
    }

    fn powf(&self, p: f64) -> Result<Self, DomainError> {
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        if self.c[0] <= 0.0 {
            return Err(DomainError::new(Primitive::Pow, self.c[0]));
        }
        Ok((self.ln()? * p).exp())
    }
}

impl Add for Series {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = self.len_with(&rhs);
        Self {
            c: (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect(),
        }
    }
}

impl Sub for Series {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let n = self.len_with(&rhs);
        Self {
            c: (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect(),
        }
    }
}

impl Mul for Series {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let n = self.len_with(&rhs);
        let c = (0..n)
            .map(|k| (0..=k).map(|j| self.coeff(j) * rhs.coeff(k - j)).sum())
            .collect();
        Self { c }
    }
}

impl Div for Series {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let n = self.len_with(&rhs);
        let mut r = rhs;
        r.c.resize(n, 0.0);
        self * r.recip_unchecked()
    }
}

impl Neg for Series {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl AddAssign for Series {
    fn add_assign(&mut self, rhs: Self) {
        if rhs.c.len() > self.c.len() {
            self.c.resize(rhs.c.len(), 0.0);
        }
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
    }
}

impl Add<f64> for Series {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Series {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Series {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.map(|a| a * rhs)
    }
}

impl Div<f64> for Series {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.map(|a| a / rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn exp_of_variable_is_factorial_series() {
        let t = Series::variable(0.0, 6);
        let e = t.exp();
        let expect: Vec<f64> = (0..7).map(|k| 1.0 / (1..=k).product::<usize>().max(1) as f64).collect();
        close(&e.c, &expect, 1e-15);
    }

    #[test]
    fn recip_and_sqrt_roundtrip() {
        let x = Series::new(vec![2.0, 0.3, -0.1, 0.05, 0.0]);
        let one = x.clone() * x.recip().unwrap();
        close(&one.c, &[1.0, 0.0, 0.0, 0.0, 0.0], 1e-15);
        let r = x.sqrt().unwrap();
        close(&(r.clone() * r).c, &x.c, 1e-15);
    }

    #[test]
    fn ln_inverts_exp() {
        let x = Series::new(vec![0.4, 1.0, 0.2, -0.3]);
        close(&x.exp().ln().unwrap().c, &x.c, 1e-14);
    }

    #[test]
    fn sin_cos_pythagoras() {
        let x = Series::new(vec![0.7, 1.0, 0.5, 0.0, 0.1]);
        let (s, c) = (x.sin(), x.cos());
        close(&(s.clone() * s + c.clone() * c).c, &[1.0, 0.0, 0.0, 0.0, 0.0], 1e-14);
    }

    #[test]
    fn powf_matches_binomial_series() {
        // (1 + t)^0.5 = 1 + t/2 - t^2/8 + t^3/16
        let x = Series::variable(1.0, 3);
        close(&x.powf(0.5).unwrap().c, &[1.0, 0.5, -0.125, 0.0625], 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(Series::variable(-1.0, 2).sqrt().is_err());
        assert!(Series::variable(0.0, 2).recip().is_err());
        assert!(Series::variable(0.0, 2).ln().is_err());
    }
}
