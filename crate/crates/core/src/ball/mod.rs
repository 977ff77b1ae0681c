//! Midpoint-radius enclosures of real numbers over exact dyadic arithmetic.
//!
//! Every operation returns a [`Ball`] whose interval `[mid - rad, mid + rad]`
//! contains the exact result of the same operation applied to any points of
//! the input intervals. Midpoints are truncated to the ball's working
//! precision and the discarded part is added to the radius; radii are kept
//! with a short mantissa and always rounded upward.

mod dyadic;
mod format;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub use dyadic::Dyadic;
pub use format::{format_rational, format_sci};

/// Mantissa bits kept for radii.
const RAD_BITS: u32 = 30;

/// Sign of an enclosure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    /// The ball is exactly the point zero.
    Zero,
    /// The ball contains zero and some nonzero value.
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    mid: Dyadic,
    rad: Dyadic,
    prec: u32,
}

impl Ball {
    pub fn zero(prec: u32) -> Ball {
        Ball::exact(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Ball {
        Ball::exact(Dyadic::one(), prec)
    }

    /// Exact point ball. The midpoint is not rounded.
    pub fn exact(mid: Dyadic, prec: u32) -> Ball {
        Ball {
            mid,
            rad: Dyadic::zero(),
            prec,
        }
    }

    pub fn from_int(v: impl Into<BigInt>, prec: u32) -> Ball {
        Ball::from_dyadic(Dyadic::from_int(v), prec)
    }

    /// Rounds `mid` to `prec` bits, absorbing the error into the radius.
    pub fn from_dyadic(mid: Dyadic, prec: u32) -> Ball {
        let (m, err) = mid.round(prec);
        Ball {
            mid: m,
            rad: err.round_up(RAD_BITS),
            prec,
        }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Ball {
        let (m, err) = Dyadic::from_rational_trunc(q, prec);
        Ball {
            mid: m,
            rad: err.round_up(RAD_BITS),
            prec,
        }
    }

    /// Ball with explicit midpoint and radius (radius is taken in absolute
    /// value and rounded up).
    pub fn with_radius(mid: Dyadic, rad: Dyadic, prec: u32) -> Ball {
        let (m, err) = mid.round(prec);
        Ball {
            mid: m,
            rad: rad.abs().add(&err).round_up(RAD_BITS),
            prec,
        }
    }

    /// The smallest ball containing both `lo` and `hi`.
    pub fn from_endpoints(lo: &BigRational, hi: &BigRational, prec: u32) -> Ball {
        let a = Ball::from_rational(lo, prec);
        let b = Ball::from_rational(hi, prec);
        let lower = a.lower().min(b.lower());
        let upper = a.upper().max(b.upper());
        let mid = lower.add(&upper).mul_pow2(-1);
        let rad = upper.sub(&lower).mul_pow2(-1);
        Ball::with_radius(mid, rad, prec)
    }

    pub fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub fn rad(&self) -> &Dyadic {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Ball {
        Ball::with_radius(self.mid.clone(), self.rad.clone(), prec)
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    /// Upper bound on `|x|` over the ball.
    pub fn mag_upper(&self) -> Dyadic {
        self.mid.abs().add(&self.rad)
    }

    /// Lower bound on `|x|` over the ball (zero if the ball contains zero).
    pub fn mag_lower(&self) -> Dyadic {
        let d = self.mid.abs().sub(&self.rad);
        if d.is_negative() {
            Dyadic::zero()
        } else {
            d
        }
    }

    pub fn add_error(&self, err: &Dyadic) -> Ball {
        Ball {
            mid: self.mid.clone(),
            rad: self.rad.add(&err.abs()).round_up(RAD_BITS),
            prec: self.prec,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lower().is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.upper().is_negative()
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    pub fn sign(&self) -> Sign {
        if self.is_positive() {
            Sign::Positive
        } else if self.is_negative() {
            Sign::Negative
        } else if self.mid.is_zero() && self.rad.is_zero() {
            Sign::Zero
        } else {
            Sign::Indeterminate
        }
    }

    pub fn contains_dyadic(&self, d: &Dyadic) -> bool {
        self.lower() <= *d && *d <= self.upper()
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        self.lower().to_rational() <= *q && *q <= self.upper().to_rational()
    }

    /// True if every point of `other` lies in `self`.
    pub fn contains(&self, other: &Ball) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn overlaps(&self, other: &Ball) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64()
    }

    pub fn mid_rational(&self) -> BigRational {
        self.mid.to_rational()
    }

    /// `mid ± rad` with `digits` significant digits in the midpoint.
    pub fn to_sci_string(&self, digits: usize) -> String {
        format!(
            "{} ± {}",
            format_sci(&self.mid.to_rational(), digits),
            format_sci(&self.rad.to_rational(), 3)
        )
    }

    fn work_prec(&self, other: &Ball) -> u32 {
        self.prec.max(other.prec)
    }

    fn rounded(exact: Dyadic, rad: Dyadic, prec: u32) -> Ball {
        let (m, err) = exact.round(prec);
        Ball {
            mid: m,
            rad: rad.add(&err).round_up(RAD_BITS),
            prec,
        }
    }

    pub fn add_ball(&self, other: &Ball) -> Ball {
        Ball::rounded(
            self.mid.add(&other.mid),
            self.rad.add(&other.rad),
            self.work_prec(other),
        )
    }

    pub fn sub_ball(&self, other: &Ball) -> Ball {
        Ball::rounded(
            self.mid.sub(&other.mid),
            self.rad.add(&other.rad),
            self.work_prec(other),
        )
    }

    pub fn mul_ball(&self, other: &Ball) -> Ball {
        let rad = self
            .mid
            .abs()
            .mul(&other.rad)
            .add(&other.mid.abs().mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        Ball::rounded(self.mid.mul(&other.mid), rad, self.work_prec(other))
    }

    /// Quotient, or `None` when the divisor contains zero.
    pub fn checked_div(&self, other: &Ball) -> Option<Ball> {
        if other.contains_zero() {
            return None;
        }
        let prec = self.work_prec(other);
        let (q, qerr) = Dyadic::div_trunc(&self.mid, &other.mid, prec + 2);
        // |a/b - am/bm| <= (ra + |am/bm| rb) / (|bm| - rb)
        let prop = if self.rad.is_zero() && other.rad.is_zero() {
            Dyadic::zero()
        } else {
            let num = self.rad.add(&q.abs().add(&qerr).mul(&other.rad));
            let den = other.mid.abs().sub(&other.rad);
            Dyadic::div_up(&num.round_up(RAD_BITS + 2), &den, RAD_BITS + 2)
        };
        Some(Ball::rounded(q, prop.add(&qerr), prec))
    }

    pub fn recip(&self) -> Option<Ball> {
        Ball::one(self.prec).checked_div(self)
    }

    pub fn square(&self) -> Ball {
        self.mul_ball(self)
    }

    pub fn pow_u(&self, mut n: u32) -> Ball {
        let mut base = self.clone();
        let mut acc = Ball::one(self.prec);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_ball(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.square();
            }
        }
        acc
    }

    pub fn mul_rational(&self, q: &BigRational) -> Ball {
        match Dyadic::from_rational_exact(q) {
            Some(d) => self.mul_ball(&Ball::exact(d, self.prec)),
            None => self.mul_ball(&Ball::from_rational(q, self.prec + 8)).with_prec(self.prec),
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Ball {
        Ball {
            mid: self.mid.mul_pow2(k),
            rad: self.rad.mul_pow2(k),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Ball {
        if self.mid.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Enclosure of `exp(x)`.
    pub fn exp(&self) -> Ball {
        let prec = self.prec;
        if self.mid.is_zero() && self.rad.is_zero() {
            return Ball::one(prec);
        }
        // exp(m) = exp(m / 2^s)^(2^s) with |m / 2^s| <= 2^-10
        let s = self
            .mid
            .log2_ceil_bound()
            .map_or(0, |lg| (lg + 10).max(0)) as u32;
        let w = prec + s + 24;
        let r = Ball::exact(self.mid.mul_pow2(-(s as i64)), w);
        let mut sum = Ball::one(w).add_ball(&r);
        let mut term = r.clone();
        let eps = Dyadic::pow2(-(w as i64) - 4);
        let mut n: u32 = 1;
        while term.mag_upper() > eps {
            n += 1;
            term = term.mul_ball(&r).checked_div(&Ball::from_int(n, w)).expect("n > 0");
            sum = sum.add_ball(&term);
        }
        // Remaining terms are bounded by |term| * |r| / (n + 1) * 2 < |term|.
        sum = sum.add_error(&term.mag_upper());
        for _ in 0..s {
            sum = sum.square();
        }
        if !self.rad.is_zero() {
            // exp(m ± r) lies within exp(m) * [e^-r, e^r]; e^r - 1 <= r + r^2 for r <= 1
            let r = &self.rad;
            let growth = if *r <= Dyadic::one() {
                r.add(&r.mul(r))
            } else {
                let steps = r.to_f64().ceil() as u32;
                Dyadic::from_int(BigInt::from(3u32).pow(steps))
            };
            sum = sum.add_error(&sum.mag_upper().mul(&growth));
        }
        sum.with_prec(prec)
    }

    /// Enclosure of `exp(x) - 1`, accurate for small `|x|`.
    pub fn exp_m1(&self) -> Ball {
        let prec = self.prec;
        let small = self
            .mag_upper()
            .log2_ceil_bound()
            .is_none_or(|lg| lg <= -4);
        if !small {
            let w = Ball::exact(self.mid.clone(), prec + 8).add_error(&self.rad);
            return w.exp().sub_ball(&Ball::one(prec + 8)).with_prec(prec);
        }
        let w = prec + 16;
        let r = Ball::exact(self.mid.clone(), w);
        let mut sum = r.clone();
        let mut term = r.clone();
        let eps = Dyadic::pow2(
            self.mid
                .log2_ceil_bound()
                .map_or(-(w as i64), |lg| lg - w as i64)
                - 4,
        );
        let mut n: u32 = 1;
        while !term.mid().is_zero() && term.mag_upper() > eps {
            n += 1;
            term = term.mul_ball(&r).checked_div(&Ball::from_int(n, w)).expect("n > 0");
            sum = sum.add_ball(&term);
        }
        sum = sum.add_error(&term.mag_upper());
        // derivative of expm1 is e^x <= 2 on |x| < 1/2
        sum.add_error(&self.rad.mul_pow2(1)).with_prec(prec)
    }

    /// Enclosure of π (Machin's formula).
    pub fn pi(prec: u32) -> Ball {
        let w = prec + 16;
        let a = atan_inv(5, w).mul_pow2(4);
        let b = atan_inv(239, w).mul_pow2(2);
        a.sub_ball(&b).with_prec(prec)
    }
}

/// `atan(1/n)` by the alternating Taylor series.
fn atan_inv(n: u32, w: u32) -> Ball {
    let inv = Ball::from_int(n, w).recip().expect("n > 0");
    let inv2 = inv.square();
    let eps = Dyadic::pow2(-(w as i64) - 4);
    let mut power = inv.clone();
    let mut sum = Ball::zero(w);
    let mut k: u32 = 0;
    loop {
        let term = power
            .checked_div(&Ball::from_int(2 * k + 1, w))
            .expect("odd divisor");
        if term.mag_upper() < eps {
            // alternating and decreasing: remainder below the first omitted term
            return sum.add_error(&term.mag_upper());
        }
        sum = if k % 2 == 0 {
            sum.add_ball(&term)
        } else {
            sum.sub_ball(&term)
        };
        power = power.mul_ball(&inv2);
        k += 1;
    }
}

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball {
            mid: self.mid.neg(),
            rad: self.rad,
            prec: self.prec,
        }
    }
}

impl Neg for &Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        -self.clone()
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $impl:ident) => {
        impl $trait<&Ball> for &Ball {
            type Output = Ball;
            fn $method(self, rhs: &Ball) -> Ball {
                self.$impl(rhs)
            }
        }
        impl $trait<Ball> for Ball {
            type Output = Ball;
            fn $method(self, rhs: Ball) -> Ball {
                (&self).$impl(&rhs)
            }
        }
        impl $trait<&Ball> for Ball {
            type Output = Ball;
            fn $method(self, rhs: &Ball) -> Ball {
                (&self).$impl(rhs)
            }
        }
        impl $trait<Ball> for &Ball {
            type Output = Ball;
            fn $method(self, rhs: Ball) -> Ball {
                self.$impl(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ball);
forward_binop!(Sub, sub, sub_ball);
forward_binop!(Mul, mul, mul_ball);

impl Div<&Ball> for &Ball {
    type Output = Ball;
    /// Panics if the divisor contains zero; use [`Ball::checked_div`] otherwise.
    fn div(self, rhs: &Ball) -> Ball {
        self.checked_div(rhs)
            .expect("division by a ball that contains zero")
    }
}

impl Div<Ball> for Ball {
    type Output = Ball;
    fn div(self, rhs: Ball) -> Ball {
        &self / &rhs
    }
}

impl PartialOrd for Ball {
    /// Ordering is defined only for disjoint balls.
    fn partial_cmp(&self, other: &Ball) -> Option<Ordering> {
        if self.upper() < other.lower() {
            Some(Ordering::Less)
        } else if other.upper() < self.lower() {
            Some(Ordering::Greater)
        } else if self == other && self.is_exact() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec as f64) * std::f64::consts::LOG10_2).floor() as usize;
        f.write_str(&self.to_sci_string(digits.clamp(3, 40)))
    }
}
