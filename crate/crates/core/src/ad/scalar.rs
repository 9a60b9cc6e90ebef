use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// Real scalar the jet machinery is generic over.
///
/// Implemented by plain `f64` (pure forward evaluation) and by [`crate::ad::Var`]
/// (forward evaluation recorded on a reverse tape). Domain checks happen in the
/// jet layer; the methods here are the raw primitives.
pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn value(&self) -> f64;
    fn add_f(self, c: f64) -> Self;
    fn mul_f(self, c: f64) -> Self;
    fn recip(self) -> Self;
    fn tanh(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn is_finite(&self) -> bool {
        self.value().is_finite()
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn add_f(self, c: f64) -> Self {
        self + c
    }
    #[inline]
    fn mul_f(self, c: f64) -> Self {
        self * c
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
}
