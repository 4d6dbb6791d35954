//! Midpoint-radius ball arithmetic with rigorous outward rounding.
//!
//! Midpoints are arbitrary-precision floats; radii are `f64` accumulated
//! with upward rounding (`next_up` after every radius operation) plus a
//! bound on the midpoint rounding error of each operation. Every operation
//! returns a ball that encloses the exact result of applying the operation
//! to any values enclosed by the operands; radii never shrink.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use rug::float::Round;
use rug::ops::AssignRound;
use rug::Float;

use crate::bigfloat::MpFloat;
use crate::scalar::{Field, Scalar};
use crate::Rational;

#[derive(Clone, Debug)]
pub struct Ball {
    mid: MpFloat,
    rad: f64,
}

/// Upper bound for 2^k in f64, saturating at the subnormal floor.
fn pow2_f64(k: i64) -> f64 {
    if k < -1074 {
        f64::from_bits(1) // smallest positive subnormal, >= 2^k
    } else if k > 1023 {
        f64::INFINITY
    } else {
        f64::powi(2.0, k as i32)
    }
}

/// Bound on the nearest-rounding error of a computed midpoint: one ulp.
fn rnd_err(mid: &MpFloat) -> f64 {
    if mid.0.is_zero() {
        return 0.0;
    }
    if !mid.0.is_finite() {
        return f64::INFINITY;
    }
    let e = mid.0.get_exp().unwrap() as i64;
    pow2_f64(e - mid.prec() as i64)
}

fn up(x: f64) -> f64 {
    x.next_up()
}

impl Ball {
    pub fn new(mid: MpFloat, rad: f64) -> Self {
        assert!(rad >= 0.0, "radius must be nonnegative");
        Ball { mid, rad }
    }

    pub fn exact_f64(x: f64, prec: u32) -> Self {
        Ball {
            mid: MpFloat::with_prec(prec.max(53), x),
            rad: 0.0,
        }
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let mut mid = Float::new(prec);
        let dir = mid.assign_round(q, Round::Nearest);
        let mid = MpFloat(mid);
        let rad = if dir == Ordering::Equal {
            0.0
        } else {
            rnd_err(&mid)
        };
        Ball { mid, rad }
    }

    pub fn mid(&self) -> &MpFloat {
        &self.mid
    }

    pub fn rad(&self) -> f64 {
        self.rad
    }

    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    /// Rigorous: every value in the ball is strictly positive.
    pub fn is_strictly_positive(&self) -> bool {
        if !self.rad.is_finite() {
            return false;
        }
        let r = MpFloat::with_prec(53, self.rad);
        let lo = self.mid.sub_round(&r, Round::Down);
        lo.0.is_sign_positive() && !lo.0.is_zero() && lo.0.is_finite()
    }

    /// Exact membership test.
    pub fn contains_rational(&self, q: &Rational) -> bool {
        if self.rad.is_infinite() {
            return true;
        }
        let mut d = self.mid.to_rational();
        d -= q;
        d.abs_mut();
        d <= Rational::from_f64(self.rad).unwrap()
    }

    pub fn sqrt(&self) -> Option<Ball> {
        if !self.is_strictly_positive() {
            return None;
        }
        let r = MpFloat::with_prec(53, self.rad);
        let lo = self.mid.sub_round(&r, Round::Down).sqrt_round(Round::Down);
        let hi = self.mid.add_round(&r, Round::Up).sqrt_round(Round::Up);
        // enclosure [lo, hi]; center at the nearest-rounded sqrt of mid
        let mid = self.mid.sqrt_round(Round::Nearest);
        let d1 = hi.sub_round(&mid, Round::Up).to_f64_round(Round::Up);
        let d2 = mid.sub_round(&lo, Round::Up).to_f64_round(Round::Up);
        Some(Ball {
            rad: up(d1.max(d2).max(0.0)),
            mid,
        })
    }

    fn abs_mid_up(&self) -> f64 {
        let mut a = self.mid.clone();
        a.0.abs_mut();
        a.to_f64_round(Round::Up)
    }

    fn abs_mid_down(&self) -> f64 {
        let mut a = self.mid.clone();
        a.0.abs_mut();
        a.to_f64_round(Round::Down)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} +/- {:e}", self.mid, self.rad)
    }
}

impl PartialEq for Ball {
    /// Equality of representations, not of enclosed sets.
    fn eq(&self, other: &Self) -> bool {
        self.mid == other.mid && self.rad == other.rad
    }
}

impl Neg for Ball {
    type Output = Ball;
    fn neg(mut self) -> Ball {
        self.mid = -self.mid;
        self
    }
}

impl Add for Ball {
    type Output = Ball;
    fn add(mut self, rhs: Ball) -> Ball {
        self += &rhs;
        self
    }
}

impl<'a> AddAssign<&'a Ball> for Ball {
    fn add_assign(&mut self, rhs: &'a Ball) {
        self.mid += &rhs.mid;
        self.rad = up(up(self.rad + rhs.rad) + rnd_err(&self.mid));
    }
}

impl Sub for Ball {
    type Output = Ball;
    fn sub(mut self, rhs: Ball) -> Ball {
        self -= &rhs;
        self
    }
}

impl<'a> SubAssign<&'a Ball> for Ball {
    fn sub_assign(&mut self, rhs: &'a Ball) {
        self.mid -= &rhs.mid;
        self.rad = up(up(self.rad + rhs.rad) + rnd_err(&self.mid));
    }
}

impl Mul for Ball {
    type Output = Ball;
    fn mul(mut self, rhs: Ball) -> Ball {
        self *= &rhs;
        self
    }
}

impl<'a> MulAssign<&'a Ball> for Ball {
    fn mul_assign(&mut self, rhs: &'a Ball) {
        let ma = self.abs_mid_up();
        let mb = rhs.abs_mid_up();
        let cross = up(up(ma * rhs.rad) + up(mb * self.rad));
        let rr = up(self.rad * rhs.rad);
        self.mid *= &rhs.mid;
        self.rad = up(up(cross + rr) + rnd_err(&self.mid));
    }
}

impl Div for Ball {
    type Output = Ball;
    fn div(mut self, rhs: Ball) -> Ball {
        self /= &rhs;
        self
    }
}

impl<'a> DivAssign<&'a Ball> for Ball {
    /// Division by a ball containing zero yields an infinite radius.
    fn div_assign(&mut self, rhs: &'a Ball) {
        let b_lo = (rhs.abs_mid_down() - rhs.rad).next_down();
        let ra = self.rad;
        self.mid /= &rhs.mid;
        if b_lo <= 0.0 || !b_lo.is_finite() {
            self.rad = f64::INFINITY;
            return;
        }
        let mq = up(self.abs_mid_up() + rnd_err(&self.mid));
        let num = up(ra + up(mq * rhs.rad));
        self.rad = up(up(num / b_lo) + rnd_err(&self.mid));
    }
}

impl Zero for Ball {
    fn zero() -> Self {
        Ball {
            mid: MpFloat::zero(),
            rad: 0.0,
        }
    }
    fn is_zero(&self) -> bool {
        self.mid.is_zero() && self.rad == 0.0
    }
}

impl One for Ball {
    fn one() -> Self {
        Ball {
            mid: MpFloat::one(),
            rad: 0.0,
        }
    }
}

impl Scalar for Ball {
    fn from_i64(v: i64) -> Self {
        Ball {
            mid: MpFloat::from_i64(v),
            rad: 0.0,
        }
    }
}

impl Field for Ball {}
