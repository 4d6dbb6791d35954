//! Arbitrary-precision floating point backed by MPFR.
//!
//! `MpFloat` wraps `rug::Float` so it satisfies the [`crate::scalar`] traits:
//! binary operations promote to the larger operand precision, and exact small
//! integers start at 53 bits and widen on first contact with a wider value.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use rug::float::Round;
use rug::ops::{AddAssignRound, AssignRound, DivAssignRound, MulAssignRound, SubAssignRound};
use rug::Float;

use crate::scalar::{Field, Real, Scalar};
use crate::Rational;

const SEED_PREC: u32 = 53;

#[derive(Clone, Debug)]
pub struct MpFloat(pub Float);

impl MpFloat {
    pub fn with_prec(prec: u32, val: f64) -> Self {
        MpFloat(Float::with_val(prec, val))
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        MpFloat(Float::with_val(prec, q))
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    fn lift(&mut self, prec: u32) {
        if self.0.prec() < prec {
            self.0.set_prec(prec);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    /// Exact conversion; panics on non-finite values.
    pub fn to_rational(&self) -> Rational {
        self.0.to_rational().expect("non-finite float")
    }
}

impl fmt::Display for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl PartialEq for MpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for MpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Neg for MpFloat {
    type Output = MpFloat;
    fn neg(mut self) -> MpFloat {
        self.0 = -self.0;
        self
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident, $round_assign:ident) => {
        impl $trait<MpFloat> for MpFloat {
            type Output = MpFloat;
            fn $method(mut self, rhs: MpFloat) -> MpFloat {
                self.lift(rhs.prec());
                self.0.$round_assign(&rhs.0, Round::Nearest);
                self
            }
        }
        impl<'a> $assign_trait<&'a MpFloat> for MpFloat {
            fn $assign(&mut self, rhs: &'a MpFloat) {
                self.lift(rhs.prec());
                self.0.$round_assign(&rhs.0, Round::Nearest);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, add_assign_round);
binop!(Sub, sub, SubAssign, sub_assign, sub_assign_round);
binop!(Mul, mul, MulAssign, mul_assign, mul_assign_round);
binop!(Div, div, DivAssign, div_assign, div_assign_round);

impl Zero for MpFloat {
    fn zero() -> Self {
        MpFloat(Float::new(SEED_PREC))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for MpFloat {
    fn one() -> Self {
        MpFloat(Float::with_val(SEED_PREC, 1))
    }
}

impl Scalar for MpFloat {
    fn from_i64(v: i64) -> Self {
        MpFloat(Float::with_val(64, v))
    }
}

impl Field for MpFloat {}

impl Real for MpFloat {
    fn zero_prec(prec: u32) -> Self {
        MpFloat(Float::new(prec))
    }
    fn one_prec(prec: u32) -> Self {
        MpFloat(Float::with_val(prec, 1))
    }
    fn from_rational_prec(q: &Rational, prec: u32) -> Self {
        Self::from_rational(q, prec)
    }
    fn from_f64_prec(x: f64, prec: u32) -> Self {
        Self::with_prec(prec, x)
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn sqrt(mut self) -> Self {
        self.0.sqrt_mut();
        self
    }
    fn abs(mut self) -> Self {
        self.0.abs_mut();
        self
    }
    fn eps(prec: u32) -> Self {
        let mut e = Float::with_val(prec, 1);
        e >>= prec - 1;
        MpFloat(e)
    }
    fn to_mpfloat(&self) -> MpFloat {
        self.clone()
    }
}

/// Directed-rounding helpers used by ball arithmetic.
impl MpFloat {
    pub fn add_round(&self, rhs: &MpFloat, round: Round) -> MpFloat {
        let mut out = self.clone();
        out.lift(rhs.prec());
        out.0.add_assign_round(&rhs.0, round);
        out
    }
    pub fn sub_round(&self, rhs: &MpFloat, round: Round) -> MpFloat {
        let mut out = self.clone();
        out.lift(rhs.prec());
        out.0.sub_assign_round(&rhs.0, round);
        out
    }
    pub fn sqrt_round(&self, round: Round) -> MpFloat {
        let mut out = self.clone();
        out.0.assign_round(self.0.sqrt_ref(), round);
        out
    }
    pub fn to_f64_round(&self, round: Round) -> f64 {
        self.0.to_f64_round(round)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_promotes() {
        let a = MpFloat::with_prec(256, 1.0);
        let b = MpFloat::zero();
        let c = b + a;
        assert_eq!(c.prec(), 256);
        assert_eq!(c.to_f64(), 1.0);
    }

    #[test]
    fn sqrt_matches_f64() {
        let a = MpFloat::with_prec(128, 2.0);
        assert!((Real::sqrt(a).to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rational_round_trip() {
        let q = crate::rat(-3, 4);
        let f = MpFloat::from_rational(&q, 128);
        assert_eq!(f.to_rational(), q);
    }
}
