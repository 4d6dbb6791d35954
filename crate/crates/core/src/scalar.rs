//! Scalar traits used by the generic polynomial and matrix code.
//!
//! `Scalar` is a commutative ring, `Field` adds exact division, and `Real`
//! adds the ordered/rounded operations the interior-point solver needs.
//! Implementations cover `f64`, exact rationals, arbitrary-precision floats,
//! and balls, so the same linear algebra runs in every arithmetic.

use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::Rational;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Self, Output = Self>
    + Sub<Self, Output = Self>
    + Mul<Self, Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    fn from_i64(v: i64) -> Self;
}

pub trait Field: Scalar + Div<Self, Output = Self> + for<'a> DivAssign<&'a Self> {}

/// Ordered field with square roots, sized by a precision in bits.
///
/// For `f64` the precision argument is ignored; for `MpFloat` it sets the
/// mantissa length.
pub trait Real: Field + PartialOrd {
    fn zero_prec(prec: u32) -> Self;
    fn one_prec(prec: u32) -> Self;
    fn from_rational_prec(q: &Rational, prec: u32) -> Self;
    fn from_f64_prec(x: f64, prec: u32) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    /// Machine epsilon at the given precision.
    fn eps(prec: u32) -> Self;
    /// Lossless view as an arbitrary-precision float.
    fn to_mpfloat(&self) -> crate::bigfloat::MpFloat;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}
impl Field for f64 {}
impl Real for f64 {
    fn zero_prec(_prec: u32) -> Self {
        0.0
    }
    fn one_prec(_prec: u32) -> Self {
        1.0
    }
    fn from_rational_prec(q: &Rational, _prec: u32) -> Self {
        q.to_f64()
    }
    fn from_f64_prec(x: f64, _prec: u32) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn eps(_prec: u32) -> Self {
        f64::EPSILON
    }
    fn to_mpfloat(&self) -> crate::bigfloat::MpFloat {
        crate::bigfloat::MpFloat::with_prec(53, *self)
    }
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        Rational::from(v)
    }
}
impl Field for Rational {}
