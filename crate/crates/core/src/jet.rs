//! Truncated second-order Taylor arithmetic.
//!
//! [`Jet2<T>`] carries a value together with its gradient and (packed,
//! symmetric) Hessian with respect to `m` seed variables. The coefficient
//! type `T` is itself a [`Scalar`], so jets nest: `Jet2<Jet2<f64>>` gives
//! mixed partials of total order four, which is what the curvature formulas
//! consume (second order inside the spray formula, second order again in the
//! curvature formula on top of it).
//!
//! Constants are represented with `m = 0` and broadcast against jets of any
//! width, so generic code can write `T::cst(2.0) * x` at every nesting level.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Primitive that rejected its argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    Sqrt,
    Recip,
    Ln,
    Pow,
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Primitive::Sqrt => "sqrt",
            Primitive::Recip => "division",
            Primitive::Ln => "ln",
            Primitive::Pow => "pow",
        };
        f.write_str(name)
    }
}

/// Evaluation left the domain of a primitive.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("domain error in {primitive} at argument {arg:e}")]
pub struct DomainError {
    pub primitive: Primitive,
    pub arg: f64,
}

impl DomainError {
    pub fn new(primitive: Primitive, arg: f64) -> Self {
        Self { primitive, arg }
    }
}

/// Number type that every chart and fiber function is written against.
///
/// `f64`, [`Jet2`] and [`crate::taylor::Series`] implement it. Operators are
/// unchecked (IEEE semantics at the base level); the `Result`-returning
/// primitives check the base value and report the offending argument.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
{
    /// Highest total derivative order carried (0 for plain numbers).
    const ORDER: usize;

    /// Constant with no derivative part.
    fn cst(c: f64) -> Self;
    /// Base (order-zero, innermost) value.
    fn re(&self) -> f64;

    fn sqrt(&self) -> Result<Self, DomainError>;
    fn recip(&self) -> Result<Self, DomainError>;
    fn ln(&self) -> Result<Self, DomainError>;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    /// `self^p`; non-integer `p` requires a positive base.
    fn powf(&self, p: f64) -> Result<Self, DomainError>;

    fn add_ref(&self, other: &Self) -> Self {
        self.clone() + other.clone()
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self.clone() - other.clone()
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }
    fn scale(&self, c: f64) -> Self {
        self.clone() * c
    }
    fn square(&self) -> Self {
        self.mul_ref(self)
    }
    fn checked_div(&self, other: &Self) -> Result<Self, DomainError> {
        Ok(self.mul_ref(&other.recip()?))
    }
    fn powi(&self, n: i32) -> Result<Self, DomainError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::cst(1.0);
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul_ref(&base);
        }
        Ok(acc)
    }
}

fn check_pow(x: f64, p: f64) -> Result<(), DomainError> {
    if x < 0.0 && p.fract() != 0.0 || x == 0.0 && p < 0.0 {
        Err(DomainError::new(Primitive::Pow, x))
    } else {
        Ok(())
    }
}

impl Scalar for f64 {
    const ORDER: usize = 0;

    fn cst(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Result<Self, DomainError> {
        if *self < 0.0 || self.is_nan() {
            Err(DomainError::new(Primitive::Sqrt, *self))
        } else {
            Ok(f64::sqrt(*self))
        }
    }
    fn recip(&self) -> Result<Self, DomainError> {
        if *self == 0.0 || self.is_nan() {
            Err(DomainError::new(Primitive::Recip, *self))
        } else {
            Ok(1.0 / *self)
        }
    }
    fn ln(&self) -> Result<Self, DomainError> {
        if *self <= 0.0 || self.is_nan() {
            Err(DomainError::new(Primitive::Ln, *self))
        } else {
            Ok(f64::ln(*self))
        }
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn powf(&self, p: f64) -> Result<Self, DomainError> {
        check_pow(*self, p)?;
        Ok(f64::powf(*self, p))
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
}

#[inline]
fn packed_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Value, gradient and symmetric Hessian with respect to `m` seeds.
#[derive(Clone, PartialEq)]
pub struct Jet2<T> {
    value: T,
    grad: Vec<T>,
    hess: Vec<T>,
}

impl<T: Scalar> fmt::Debug for Jet2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("grad", &self.grad)
            .field("hess", &self.hess)
            .finish()
    }
}

impl<T: Scalar> Jet2<T> {
    /// Constant of width zero; broadcasts against any jet.
    pub fn constant(value: T) -> Self {
        Self {
            value,
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }

    /// Seed variable `index` of `m`.
    pub fn variable(value: T, index: usize, m: usize) -> Self {
        assert!(index < m, "seed index {index} out of range for {m} variables");
        let mut grad = vec![T::cst(0.0); m];
        grad[index] = T::cst(1.0);
        Self {
            value,
            grad,
            hess: vec![T::cst(0.0); packed_len(m)],
        }
    }

    /// Builds a jet from explicit parts; `hess` is read as a full `m x m`
    /// matrix and symmetrized.
    pub fn from_parts(value: T, grad: Vec<T>, hess: Vec<Vec<T>>) -> Self {
        let m = grad.len();
        assert_eq!(hess.len(), m);
        let mut packed = Vec::with_capacity(packed_len(m));
        for i in 0..m {
            for j in i..m {
                packed.push((hess[i][j].clone() + hess[j][i].clone()) * 0.5);
            }
        }
        Self {
            value,
            grad,
            hess: packed,
        }
    }

    /// Number of seed variables (zero for constants).
    pub fn width(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> &T {
        &self.value
    }

    pub fn into_value(self) -> T {
        self.value
    }

    /// First partial with respect to seed `i` (zero for constants).
    pub fn d(&self, i: usize) -> T {
        self.grad.get(i).cloned().unwrap_or_else(|| T::cst(0.0))
    }

    /// Second partial with respect to seeds `i`, `j`.
    pub fn dd(&self, i: usize, j: usize) -> T {
        let m = self.width();
        if m == 0 {
            return T::cst(0.0);
        }
        self.hess[idx(m, i, j)].clone()
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    fn chain(&self, f0: T, f1: T, f2: T) -> Self {
        let m = self.width();
        let grad: Vec<T> = self.grad.iter().map(|g| f1.mul_ref(g)).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..m {
            let f2gi = f2.mul_ref(&self.grad[i]);
            for j in i..m {
                let mut h = f1.mul_ref(&self.hess[idx(m, i, j)]);
                h += f2gi.mul_ref(&self.grad[j]);
                hess.push(h);
            }
        }
        Self {
            value: f0,
            grad,
            hess,
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T, neg_other: bool) -> Self {
        let value = f(&self.value, &other.value);
        let (ma, mb) = (self.width(), other.width());
        let (grad, hess) = if ma == mb {
            (
                self.grad.iter().zip(&other.grad).map(|(a, b)| f(a, b)).collect(),
                self.hess.iter().zip(&other.hess).map(|(a, b)| f(a, b)).collect(),
            )
        } else if mb == 0 {
            (self.grad.clone(), self.hess.clone())
        } else if ma == 0 {
            if neg_other {
                (
                    other.grad.iter().map(|b| -b.clone()).collect(),
                    other.hess.iter().map(|b| -b.clone()).collect(),
                )
            } else {
                (other.grad.clone(), other.hess.clone())
            }
        } else {
            panic!("jet width mismatch: {ma} vs {mb}");
        };
        Self { value, grad, hess }
    }

    fn mul_jet(&self, other: &Self) -> Self {
        let (ma, mb) = (self.width(), other.width());
        let value = self.value.mul_ref(&other.value);
        if mb == 0 {
            return self.scale_by(&other.value, value);
        }
        if ma == 0 {
            return other.scale_by(&self.value, value);
        }
        assert_eq!(ma, mb, "jet width mismatch");
        let m = ma;
        let grad: Vec<T> = (0..m)
            .map(|i| {
                let mut g = self.value.mul_ref(&other.grad[i]);
                g += other.value.mul_ref(&self.grad[i]);
                g
            })
            .collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..m {
            for j in i..m {
                let k = idx(m, i, j);
                let mut h = self.value.mul_ref(&other.hess[k]);
                h += other.value.mul_ref(&self.hess[k]);
                h += self.grad[i].mul_ref(&other.grad[j]);
                h += self.grad[j].mul_ref(&other.grad[i]);
                hess.push(h);
            }
        }
        Self { value, grad, hess }
    }

    fn scale_by(&self, c: &T, value: T) -> Self {
        Self {
            value,
            grad: self.grad.iter().map(|g| g.mul_ref(c)).collect(),
            hess: self.hess.iter().map(|h| h.mul_ref(c)).collect(),
        }
    }

    fn recip_unchecked(&self) -> Self {
        let f0 = T::cst(1.0) / self.value.clone();
        let f1 = -f0.square();
        let f2 = f0.square().mul_ref(&f0).scale(2.0);
        self.chain(f0, f1, f2)
    }
}

#[inline]
fn idx(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // start of row i in the packed upper triangle
    i * m - i * (i + 1) / 2 + i + (j - i)
}

impl<T: Scalar> Scalar for Jet2<T> {
    const ORDER: usize = T::ORDER + 2;

    fn cst(c: f64) -> Self {
        Self::constant(T::cst(c))
    }

    fn re(&self) -> f64 {
        self.value.re()
    }

    fn sqrt(&self) -> Result<Self, DomainError> {
        let f0 = self.value.sqrt()?;
        if f0.re() == 0.0 && self.width() > 0 {
            return Err(DomainError::new(Primitive::Sqrt, self.re()));
        }
        let f1 = f0.recip()?.scale(0.5);
        let f2 = f1.square().mul_ref(&f1).scale(-2.0);
        Ok(self.chain(f0, f1, f2))
    }

    fn recip(&self) -> Result<Self, DomainError> {
        let f0 = self.value.recip()?;
        let f1 = -f0.square();
        let f2 = f0.square().mul_ref(&f0).scale(2.0);
        Ok(self.chain(f0, f1, f2))
    }

    fn ln(&self) -> Result<Self, DomainError> {
        let f0 = self.value.ln()?;
        let f1 = self.value.recip()?;
        let f2 = -f1.square();
        Ok(self.chain(f0, f1, f2))
    }

    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e.clone(), e.clone(), e)
    }

    fn sin(&self) -> Self {
        let s = self.value.sin();
        let c = self.value.cos();
        self.chain(s.clone(), c, -s)
    }

    fn cos(&self) -> Self {
        let s = self.value.sin();
        let c = self.value.cos();
        self.chain(c.clone(), -s, -c)
    }

    fn powf(&self, p: f64) -> Result<Self, DomainError> {
        check_pow(self.re(), p)?;
        let f0 = self.value.powf(p)?;
        let f1 = self.value.powf(p - 1.0)?.scale(p);
        let f2 = if p == 1.0 || p == 0.0 {
            T::cst(0.0)
        } else {
            self.value.powf(p - 2.0)?.scale(p * (p - 1.0))
        };
        Ok(self.chain(f0, f1, f2))
    }

    fn add_ref(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.add_ref(b), false)
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.sub_ref(b), true)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.mul_jet(other)
    }

    fn scale(&self, c: f64) -> Self {
        Self {
            value: self.value.scale(c),
            grad: self.grad.iter().map(|g| g.scale(c)).collect(),
            hess: self.hess.iter().map(|h| h.scale(c)).collect(),
        }
    }
}

impl<T: Scalar> Add for Jet2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl<T: Scalar> Sub for Jet2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.sub_ref(&rhs)
    }
}

impl<T: Scalar> Mul for Jet2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_jet(&rhs)
    }
}

impl<T: Scalar> Div for Jet2<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.mul_jet(&rhs.recip_unchecked())
    }
}

impl<T: Scalar> Neg for Jet2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<T: Scalar> AddAssign for Jet2<T> {
    fn add_assign(&mut self, rhs: Self) {
        if self.width() == rhs.width() {
            self.value += rhs.value;
            for (a, b) in self.grad.iter_mut().zip(rhs.grad) {
                *a += b;
            }
            for (a, b) in self.hess.iter_mut().zip(rhs.hess) {
                *a += b;
            }
        } else {
            *self = self.add_ref(&rhs);
        }
    }
}

impl<T: Scalar> Add<f64> for Jet2<T> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.value = self.value + rhs;
        self
    }
}

impl<T: Scalar> Sub<f64> for Jet2<T> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.value = self.value - rhs;
        self
    }
}

impl<T: Scalar> Mul<f64> for Jet2<T> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<T: Scalar> Div<f64> for Jet2<T> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.scale(1.0 / rhs)
    }
}

/// Function of `m` reals written once against [`Scalar`].
pub trait ScalarFn {
    fn eval<T: Scalar>(&self, v: &[T]) -> Result<T, DomainError>;
}

/// Function of a base point `x` and a direction `y`.
pub trait XYFunction {
    fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T, DomainError>;
}

/// Evaluates `f` at `seed`, differentiating with respect to the variables
/// listed in `active` (in that order); the rest are held constant.
pub fn lift<F: ScalarFn>(f: &F, seed: &[f64], active: &[usize]) -> Result<Jet2<f64>, DomainError> {
    let m = active.len();
    let args: Vec<Jet2<f64>> = seed
        .iter()
        .enumerate()
        .map(|(k, &v)| match active.iter().position(|&a| a == k) {
            Some(slot) => Jet2::variable(v, slot, m),
            None => Jet2::constant(v),
        })
        .collect();
    f.eval(&args)
}

/// Table of mixed partials `d^{a+b} f / dx^a dy^b` with `a, b <= 2`.
///
/// Built from a `Jet2` over `x` whose coefficients are `Jet2`s over `y`.
#[derive(Debug, Clone)]
pub struct MixedPartials {
    jet: Jet2<Jet2<f64>>,
    max_x: usize,
    max_y: usize,
}

impl MixedPartials {
    /// Partial derivative with respect to the listed `x` and `y` indices
    /// (repeats allowed). `None` if the order exceeds what was requested.
    pub fn get(&self, xs: &[usize], ys: &[usize]) -> Option<f64> {
        if xs.len() > self.max_x || ys.len() > self.max_y {
            return None;
        }
        let outer = match xs {
            [] => self.jet.value().clone(),
            [i] => self.jet.d(*i),
            [i, j] => self.jet.dd(*i, *j),
            _ => return None,
        };
        Some(match ys {
            [] => *outer.value(),
            [k] => outer.d(*k),
            [k, l] => outer.dd(*k, *l),
            _ => return None,
        })
    }

    pub fn value(&self) -> f64 {
        self.jet.re()
    }
}

/// Mixed `x`/`y` partials of `f` at `(x0, y0)` up to `orders = (dx, dy)`,
/// each at most 2.
pub fn nested_xy_derivatives<F: XYFunction>(
    f: &F,
    x0: &[f64],
    y0: &[f64],
    orders: (usize, usize),
) -> Result<MixedPartials, DomainError> {
    assert!(orders.0 <= 2 && orders.1 <= 2, "orders above 2 are not supported");
    let (nx, ny) = (x0.len(), y0.len());
    let x: Vec<Jet2<Jet2<f64>>> = x0
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet2::variable(Jet2::constant(v), i, nx))
        .collect();
    let y: Vec<Jet2<Jet2<f64>>> = y0
        .iter()
        .enumerate()
        .map(|(k, &v)| Jet2::constant(Jet2::variable(v, k, ny)))
        .collect();
    let jet = f.eval(&x, &y)?;
    Ok(MixedPartials {
        jet,
        max_x: orders.0,
        max_y: orders.1,
    })
}

/// Euler residual `y^k dg/dy^k - degree * g` of a positively homogeneous
/// fiber function, relative to `max(1, |g|)`.
pub fn euler_homogeneity_residual<F: ScalarFn>(f: &F, y: &[f64], degree: f64) -> Result<f64, DomainError> {
    let active: Vec<usize> = (0..y.len()).collect();
    let jet = lift(f, y, &active)?;
    let euler: f64 = y.iter().enumerate().map(|(k, yk)| yk * jet.d(k)).sum();
    Ok((euler - degree * jet.re()).abs() / jet.re().abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Square;
    impl ScalarFn for Square {
        fn eval<T: Scalar>(&self, v: &[T]) -> Result<T, DomainError> {
            Ok(v[0].square())
        }
    }

    struct Bilinear;
    impl ScalarFn for Bilinear {
        fn eval<T: Scalar>(&self, v: &[T]) -> Result<T, DomainError> {
            Ok(v[0].mul_ref(&v[1]))
        }
    }

    struct Cap;
    impl ScalarFn for Cap {
        fn eval<T: Scalar>(&self, v: &[T]) -> Result<T, DomainError> {
            (T::cst(1.0) - v[0].square()).sqrt()
        }
    }

    struct Mono;
    impl XYFunction for Mono {
        fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T, DomainError> {
            Ok(x[0].mul_ref(&y[0].square()))
        }
    }

    struct FiberOnly;
    impl XYFunction for FiberOnly {
        fn eval<T: Scalar>(&self, _x: &[T], y: &[T]) -> Result<T, DomainError> {
            Ok(y[0].mul_ref(&y[1]).exp())
        }
    }

    #[test]
    fn packed_index_covers_triangle() {
        for m in 1..7 {
            let mut seen = vec![false; packed_len(m)];
            for i in 0..m {
                for j in i..m {
                    let k = idx(m, i, j);
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(k, idx(m, j, i));
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn square_at_three() {
        let j = lift(&Square, &[3.0], &[0]).unwrap();
        assert_eq!(j.re(), 9.0);
        assert_eq!(j.d(0), 6.0);
        assert_eq!(j.dd(0, 0), 2.0);
    }

    #[test]
    fn bilinear_hessian() {
        let j = lift(&Bilinear, &[2.0, 5.0], &[0, 1]).unwrap();
        assert_eq!(j.re(), 10.0);
        assert_eq!((j.d(0), j.d(1)), (5.0, 2.0));
        assert_eq!((j.dd(0, 0), j.dd(0, 1), j.dd(1, 0), j.dd(1, 1)), (0.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn cap_at_critical_point() {
        let j = lift(&Cap, &[0.0], &[0]).unwrap();
        assert_eq!(j.re(), 1.0);
        assert_eq!(j.d(0), 0.0);
        assert!((j.dd(0, 0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_of_negative_reports_primitive() {
        let err = lift(&Cap, &[2.0], &[0]).unwrap_err();
        assert_eq!(err.primitive, Primitive::Sqrt);
        assert_eq!(err.arg, -3.0);
    }

    #[test]
    fn recip_of_zero_is_error() {
        let x = Jet2::variable(0.0, 0, 1);
        assert_eq!(x.recip().unwrap_err().primitive, Primitive::Recip);
    }

    #[test]
    fn inactive_variables_are_constant() {
        let j = lift(&Bilinear, &[2.0, 5.0], &[1]).unwrap();
        assert_eq!(j.width(), 1);
        assert_eq!(j.d(0), 2.0);
        assert_eq!(j.dd(0, 0), 0.0);
    }

    #[test]
    fn monomial_mixed_partial() {
        let t = nested_xy_derivatives(&Mono, &[2.0], &[3.0], (2, 2)).unwrap();
        assert_eq!(t.get(&[0], &[0]), Some(6.0));
        assert_eq!(t.get(&[], &[0, 0]), Some(4.0));
        assert_eq!(t.get(&[0], &[0, 0]), Some(2.0));
        assert_eq!(t.get(&[0, 0], &[]), Some(0.0));
        assert_eq!(t.value(), 18.0);
    }

    #[test]
    fn order_limits_are_respected() {
        let t = nested_xy_derivatives(&Mono, &[2.0], &[3.0], (1, 1)).unwrap();
        assert!(t.get(&[0, 0], &[]).is_none());
        assert!(t.get(&[], &[0, 0]).is_none());
        assert!(t.get(&[0], &[0]).is_some());
    }

    #[test]
    fn x_independent_function_has_zero_x_partials() {
        let t = nested_xy_derivatives(&FiberOnly, &[0.3, -0.2], &[0.7, 0.4], (2, 2)).unwrap();
        for i in 0..2 {
            assert_eq!(t.get(&[i], &[]), Some(0.0));
            for k in 0..2 {
                assert_eq!(t.get(&[i], &[k]), Some(0.0));
                assert_eq!(t.get(&[i, k], &[0, 1]), Some(0.0));
            }
        }
    }

    #[test]
    fn transcendental_chain_rules() {
        struct F;
        impl ScalarFn for F {
            fn eval<T: Scalar>(&self, v: &[T]) -> Result<T, DomainError> {
                Ok(v[0].sin().mul_ref(&v[0].ln()?) + v[0].powf(1.5)? + v[0].cos().exp())
            }
        }
        let x = 0.8_f64;
        let j = lift(&F, &[x], &[0]).unwrap();
        let f1 = x.cos() * x.ln() + x.sin() / x + 1.5 * x.sqrt() - x.sin() * x.cos().exp();
        let f2 = -x.sin() * x.ln() + 2.0 * x.cos() / x - x.sin() / (x * x) + 0.75 / x.sqrt()
            + (x.sin() * x.sin() - x.cos()) * x.cos().exp();
        assert!((j.d(0) - f1).abs() < 1e-14);
        assert!((j.dd(0, 0) - f2).abs() < 1e-13);
    }

    #[test]
    fn nested_jets_give_fourth_derivative() {
        // f = x^4 over two nested univariate levels: d^2/dx^2 of d^2/dx^2 = 24
        let x = Jet2::variable(Jet2::variable(1.5, 0, 1), 0, 1);
        let f = x.powi(4).unwrap();
        assert!((f.dd(0, 0).dd(0, 0) - 24.0).abs() < 1e-12);
        assert!((f.d(0).d(0) - 12.0 * 1.5 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn euler_residual_for_quadratic_form() {
        struct Quad;
        impl ScalarFn for Quad {
            fn eval<T: Scalar>(&self, y: &[T]) -> Result<T, DomainError> {
                Ok(y[0].square() * 2.0 + y[0].mul_ref(&y[1]) + y[1].square() * 3.0)
            }
        }
        let r = euler_homogeneity_residual(&Quad, &[0.4, -1.3], 2.0).unwrap();
        assert!(r < 1e-14);
    }
}
