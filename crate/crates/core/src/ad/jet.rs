//! Second-order forward jets over a handful of tracked inputs.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian with
//! respect to up to [`MAX_VARS`] tracked inputs. The Hessian is stored as a
//! packed upper triangle, so symmetry holds by construction. Components are
//! generic over [`Scalar`]; with [`crate::ad::Var`] every component is itself
//! recorded on a reverse tape.

use std::ops::{Add, Mul, Neg, Sub};

use super::{AdError, Scalar};

/// Maximum number of tracked input variables.
pub const MAX_VARS: usize = 4;
const TRI: usize = MAX_VARS * (MAX_VARS + 1) / 2;

#[inline]
const fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * MAX_VARS - (i * i.saturating_sub(1)) / 2 + (j - i)
}

/// Arithmetic selector for [`Jet2::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy)]
pub struct Jet2<S> {
    k: u8,
    value: S,
    d1: [S; MAX_VARS],
    d2: [S; TRI],
}

/// First-order jet: value and gradient only.
#[derive(Debug, Clone, Copy)]
pub struct Jet1<S> {
    k: u8,
    value: S,
    d1: [S; MAX_VARS],
}

fn check_k(k: usize) -> Result<(), AdError> {
    if k == 0 || k > MAX_VARS {
        Err(AdError::BadTrackedCount(k))
    } else {
        Ok(())
    }
}

impl<S: Scalar> Jet2<S> {
    /// Constant jet with `k` tracked variables (all derivatives zero).
    pub fn constant(x: S, k: usize) -> Self {
        debug_assert!(k >= 1 && k <= MAX_VARS);
        Jet2 {
            k: k as u8,
            value: x,
            d1: [S::zero(); MAX_VARS],
            d2: [S::zero(); TRI],
        }
    }

    /// Seeds `x` as tracked variable `input_index`, or as a constant when `None`.
    pub fn lift(x: S, input_index: Option<usize>, k: usize) -> Result<Self, AdError> {
        check_k(k)?;
        let mut j = Self::constant(x, k);
        if let Some(i) = input_index {
            if i >= k {
                return Err(AdError::IndexOutOfRange { index: i, k });
            }
            j.d1[i] = S::from_f64(1.0);
        }
        Ok(j)
    }

    /// Builds a jet from explicit components; `hess` is read as a full k×k
    /// row-major matrix and only its upper triangle is kept.
    pub fn from_parts(value: S, grad: &[S], hess: &[S]) -> Result<Self, AdError> {
        let k = grad.len();
        check_k(k)?;
        if hess.len() != k * k {
            return Err(AdError::DimMismatch(hess.len(), k * k));
        }
        let mut j = Self::constant(value, k);
        j.d1[..k].copy_from_slice(grad);
        for a in 0..k {
            for b in a..k {
                j.d2[tri(a, b)] = hess[a * k + b];
            }
        }
        Ok(j)
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn value(&self) -> S {
        self.value
    }

    pub fn d1(&self, i: usize) -> S {
        self.d1[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> S {
        self.d2[tri(i, j)]
    }

    pub fn gradient(&self) -> &[S] {
        &self.d1[..self.k()]
    }

    /// Packed components in the order value, d1[0..k], then the upper
    /// triangle of d2 row by row.
    pub fn components(&self) -> Vec<S> {
        let k = self.k();
        let mut out = Vec::with_capacity(component_count(k));
        out.push(self.value);
        out.extend_from_slice(&self.d1[..k]);
        for a in 0..k {
            for b in a..k {
                out.push(self.d2[tri(a, b)]);
            }
        }
        out
    }

    /// Inverse of [`Jet2::components`].
    pub fn from_components(k: usize, comps: &[S]) -> Result<Self, AdError> {
        check_k(k)?;
        if comps.len() != component_count(k) {
            return Err(AdError::DimMismatch(comps.len(), component_count(k)));
        }
        let mut j = Self::constant(comps[0], k);
        j.d1[..k].copy_from_slice(&comps[1..=k]);
        let mut c = k + 1;
        for a in 0..k {
            for b in a..k {
                j.d2[tri(a, b)] = comps[c];
                c += 1;
            }
        }
        Ok(j)
    }

    /// Derivative along input `i` as a first-order jet.
    pub fn partial(&self, i: usize) -> Jet1<S> {
        let mut d1 = [S::zero(); MAX_VARS];
        for (j, d) in d1.iter_mut().enumerate().take(self.k()) {
            *d = self.d2[tri(i, j)];
        }
        Jet1 {
            k: self.k,
            value: self.d1[i],
            d1,
        }
    }

    /// Drops the second-order part.
    pub fn first_order(&self) -> Jet1<S> {
        Jet1 {
            k: self.k,
            value: self.value,
            d1: self.d1,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.iter().all(|d| d.is_finite()) && self.d2.iter().all(|d| d.is_finite())
    }

    pub fn scale(self, c: f64) -> Self {
        let mut out = self;
        out.value = out.value.mul_f(c);
        for d in out.d1.iter_mut() {
            *d = d.mul_f(c);
        }
        for d in out.d2.iter_mut() {
            *d = d.mul_f(c);
        }
        out
    }

    pub fn add_f(self, c: f64) -> Self {
        let mut out = self;
        out.value = out.value.add_f(c);
        out
    }

    /// Applies a scalar function given its value and first two derivatives at `self.value`.
    pub fn chain(&self, f: S, f1: S, f2: S) -> Self {
        let k = self.k();
        let mut out = Self::constant(f, k);
        for i in 0..k {
            out.d1[i] = f1 * self.d1[i];
        }
        for a in 0..k {
            for b in a..k {
                let t = tri(a, b);
                out.d2[t] = f1 * self.d2[t] + f2 * self.d1[a] * self.d1[b];
            }
        }
        out
    }

    pub fn tanh(&self) -> Self {
        let s = self.value.tanh();
        let s1 = S::from_f64(1.0) - s * s;
        let s2 = (s * s1).mul_f(-2.0);
        self.chain(s, s1, s2)
    }

    /// `sqrt(x² + eps²)`, a smooth stand-in for `|x|`.
    pub fn abs_eps(&self, eps: f64) -> Self {
        let e2 = eps * eps;
        let f = (self.value * self.value).add_f(e2).sqrt();
        let inv = f.recip();
        let f1 = self.value * inv;
        let f2 = (inv * inv * inv).mul_f(e2);
        self.chain(f, f1, f2)
    }

    pub fn checked_sqrt(&self) -> Result<Self, AdError> {
        let x = self.value.value();
        if !(x > 0.0) {
            return Err(AdError::Domain {
                op: "sqrt",
                operands: vec![x],
            });
        }
        let f = self.value.sqrt();
        let inv = f.recip();
        let f1 = inv.mul_f(0.5);
        let f2 = (inv * inv * inv).mul_f(-0.25);
        Ok(self.chain(f, f1, f2))
    }

    /// `x^p`. Non-integer exponents need a positive base.
    pub fn checked_powf(&self, p: f64) -> Result<Self, AdError> {
        let x = self.value.value();
        let integral = p.fract() == 0.0 && p.abs() < 64.0;
        if integral {
            if p == 0.0 {
                return Ok(Self::constant(S::from_f64(1.0), self.k()));
            }
            if x == 0.0 && p < 2.0 {
                return Err(AdError::Domain {
                    op: "powf",
                    operands: vec![x, p],
                });
            }
            let n = p as i32;
            let f = ipow(self.value, n);
            let f1 = ipow(self.value, n - 1).mul_f(p);
            let f2 = if n == 1 { S::zero() } else { ipow(self.value, n - 2).mul_f(p * (p - 1.0)) };
            return Ok(self.chain(f, f1, f2));
        }
        if !(x > 0.0) {
            return Err(AdError::Domain {
                op: "powf",
                operands: vec![x, p],
            });
        }
        let f = self.value.powf(p);
        let inv = self.value.recip();
        let f1 = (f * inv).mul_f(p);
        let f2 = (f * inv * inv).mul_f(p * (p - 1.0));
        Ok(self.chain(f, f1, f2))
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn checked_ln(&self) -> Result<Self, AdError> {
        let x = self.value.value();
        if !(x > 0.0) {
            return Err(AdError::Domain {
                op: "ln",
                operands: vec![x],
            });
        }
        let inv = self.value.recip();
        Ok(self.chain(self.value.ln(), inv, -(inv * inv)))
    }

    pub fn checked_recip(&self) -> Result<Self, AdError> {
        let x = self.value.value();
        let out = if x == 0.0 {
            None
        } else {
            let inv = self.value.recip();
            let inv2 = inv * inv;
            Some(self.chain(inv, -inv2, (inv2 * inv).mul_f(2.0)))
        };
        match out {
            Some(j) if j.is_finite() => Ok(j),
            _ => Err(AdError::Domain {
                op: "recip",
                operands: vec![x],
            }),
        }
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, AdError> {
        let err = || AdError::Domain {
            op: "div",
            operands: vec![self.value.value(), rhs.value.value()],
        };
        let inv = rhs.checked_recip().map_err(|_| err())?;
        let q = *self * inv;
        if q.is_finite() {
            Ok(q)
        } else {
            Err(err())
        }
    }

    pub fn arith(&self, op: ArithOp, rhs: &Self) -> Result<Self, AdError> {
        Ok(match op {
            ArithOp::Add => *self + *rhs,
            ArithOp::Sub => *self - *rhs,
            ArithOp::Mul => *self * *rhs,
            ArithOp::Div => self.checked_div(rhs)?,
        })
    }

    /// `max(x, 0)` taken on the value; the derivative is one-sided at zero.
    pub fn positive_part(&self) -> Self {
        if self.value.value() > 0.0 {
            *self
        } else {
            Self::constant(S::zero(), self.k())
        }
    }
}

fn ipow<S: Scalar>(x: S, n: i32) -> S {
    if n == 0 {
        return S::from_f64(1.0);
    }
    let base = if n < 0 { x.recip() } else { x };
    let mut acc = base;
    for _ in 1..n.unsigned_abs() {
        acc = acc * base;
    }
    acc
}

/// Number of packed components for `k` tracked variables.
pub const fn component_count(k: usize) -> usize {
    1 + k + k * (k + 1) / 2
}

impl<S: Scalar> Add for Jet2<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        out.k = self.k.max(rhs.k);
        out.value = self.value + rhs.value;
        for i in 0..out.k() {
            out.d1[i] = self.d1[i] + rhs.d1[i];
        }
        for a in 0..out.k() {
            for b in a..out.k() {
                let t = tri(a, b);
                out.d2[t] = self.d2[t] + rhs.d2[t];
            }
        }
        out
    }
}

impl<S: Scalar> Sub for Jet2<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<S: Scalar> Neg for Jet2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self;
        out.value = -self.value;
        for i in 0..self.k() {
            out.d1[i] = -self.d1[i];
        }
        for a in 0..self.k() {
            for b in a..self.k() {
                let t = tri(a, b);
                out.d2[t] = -self.d2[t];
            }
        }
        out
    }
}

impl<S: Scalar> Mul for Jet2<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let k = self.k.max(rhs.k) as usize;
        let (a, b) = (&self, &rhs);
        let mut out = Self::constant(a.value * b.value, k);
        for i in 0..k {
            out.d1[i] = a.d1[i] * b.value + a.value * b.d1[i];
        }
        for i in 0..k {
            for j in i..k {
                let t = tri(i, j);
                out.d2[t] = a.d2[t] * b.value + a.d1[i] * b.d1[j] + a.d1[j] * b.d1[i] + a.value * b.d2[t];
            }
        }
        out
    }
}

impl<S: Scalar> Jet1<S> {
    pub fn constant(x: S, k: usize) -> Self {
        Jet1 {
            k: k as u8,
            value: x,
            d1: [S::zero(); MAX_VARS],
        }
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn value(&self) -> S {
        self.value
    }

    pub fn d1(&self, i: usize) -> S {
        self.d1[i]
    }

    pub fn scale(self, c: f64) -> Self {
        let mut out = self;
        out.value = out.value.mul_f(c);
        for d in out.d1.iter_mut() {
            *d = d.mul_f(c);
        }
        out
    }

    pub fn add_f(self, c: f64) -> Self {
        let mut out = self;
        out.value = out.value.add_f(c);
        out
    }

    pub fn chain(&self, f: S, f1: S) -> Self {
        let mut out = Self::constant(f, self.k());
        for i in 0..self.k() {
            out.d1[i] = f1 * self.d1[i];
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        let f = self.value.sqrt();
        self.chain(f, f.recip().mul_f(0.5))
    }

    /// `x^p` for positive `x`.
    pub fn powf(&self, p: f64) -> Self {
        let f = self.value.powf(p);
        self.chain(f, (f * self.value.recip()).mul_f(p))
    }

    pub fn recip(&self) -> Self {
        let inv = self.value.recip();
        self.chain(inv, -(inv * inv))
    }
}

impl<S: Scalar> Add for Jet1<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        out.k = self.k.max(rhs.k);
        out.value = self.value + rhs.value;
        for i in 0..out.k() {
            out.d1[i] = self.d1[i] + rhs.d1[i];
        }
        out
    }
}

impl<S: Scalar> Sub for Jet1<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<S: Scalar> Neg for Jet1<S> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self;
        out.value = -self.value;
        for i in 0..self.k() {
            out.d1[i] = -self.d1[i];
        }
        out
    }
}

impl<S: Scalar> Mul for Jet1<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let k = self.k.max(rhs.k) as usize;
        let mut out = Self::constant(self.value * rhs.value, k);
        for i in 0..k {
            out.d1[i] = self.d1[i] * rhs.value + self.value * rhs.d1[i];
        }
        out
    }
}
