use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::Ball;

/// Dense univariate polynomial with exact rational coefficients.
///
/// `coeffs[i]` is the coefficient of `t^i`. The highest stored coefficient is
/// never zero; the zero polynomial has no coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn from_ints<I, T>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        Self::new(
            coeffs
                .into_iter()
                .map(|c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `c * t^n`
    pub fn monomial(c: BigRational, n: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = c;
        Self::new(coeffs)
    }

    /// `t + a`
    pub fn linear_shift(a: BigRational) -> Self {
        Self::new(vec![a, BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `t^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        RationalPoly {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_ball(&self, x: &Ball) -> Ball {
        let prec = x.prec();
        self.coeffs.iter().rev().fold(Ball::zero(prec), |acc, c| {
            &(&acc * x) + &Ball::from_rational(c, prec)
        })
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `self(t + a)`
    pub fn taylor_shift(&self, a: &BigRational) -> Self {
        let lin = Self::linear_shift(a.clone());
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * &lin) + &Self::constant(c.clone()))
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading().expect("nonzero").clone();
        let mut rem = self.coeffs.clone();
        let n = self.coeffs.len();
        if n <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); n - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    /// Truncated power-series quotient `self / den mod t^n`; `den(0) != 0`.
    pub fn series_div(&self, den: &Self, n: usize) -> Vec<BigRational> {
        let d0 = den.coeff(0);
        assert!(!d0.is_zero(), "series division needs a nonzero constant term");
        let inv = d0.recip();
        let mut out: Vec<BigRational> = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = self.coeff(i);
            for (j, o) in out.iter().enumerate() {
                let dj = den.coeff(i - j);
                if !dj.is_zero() {
                    acc -= o * dj;
                }
            }
            out.push(acc * &inv);
        }
        out
    }

    /// True if every coefficient is nonnegative.
    pub fn all_coeffs_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// True if every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }
}

impl Add<&RationalPoly> for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub<&RationalPoly> for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul<&RationalPoly> for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<RationalPoly> for RationalPoly {
            type Output = RationalPoly;
            fn $method(self, rhs: RationalPoly) -> RationalPoly {
                (&self).$method(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        -&self
    }
}

impl fmt::Display for RationalPoly {
    /// Ascending powers of `t`, e.g. `-2 + t` or `3/4*t^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => {}
                _ => write!(f, "{mag}*")?,
            }
            match i {
                0 => {}
                1 => f.write_str("t")?,
                _ => write!(f, "t^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn canonical_zero_has_no_coefficients() {
        let p = RationalPoly::from_ints([0, 0, 0]);
        assert!(p.is_zero());
        assert_eq!(p.degree(), None);
        assert!(p.derivative().is_zero());
        assert!(RationalPoly::zero().derivative().is_zero());
    }

    #[test]
    fn eval_and_derivative() {
        let p = RationalPoly::from_ints([1, -2, 3]);
        assert_eq!(p.eval(&q(1, 2)), q(3, 4));
        assert_eq!(p.derivative(), RationalPoly::from_ints([-2, 6]));
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = RationalPoly::from_ints([5, 0, -3, 1, 7]);
        let b = RationalPoly::from_ints([2, 1, 3]);
        let (qt, r) = a.div_rem(&b);
        assert!(r.degree().unwrap_or(0) < 2);
        assert_eq!(&(&qt * &b) + &r, a);
    }

    #[test]
    fn gcd_of_shared_factor() {
        let f = RationalPoly::from_ints([1, 1]); // t + 1
        let a = &f * &RationalPoly::from_ints([-2, 1]);
        let b = &f * &RationalPoly::from_ints([3, 0, 1]);
        assert_eq!(a.gcd(&b), f);
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let p = RationalPoly::from_ints([4, -1, 0, 2]);
        let s = p.taylor_shift(&q(3, 2));
        for x in [q(0, 1), q(1, 3), q(-5, 2)] {
            assert_eq!(s.eval(&x), p.eval(&(&x + q(3, 2))));
        }
    }

    #[test]
    fn series_division() {
        // 1 / (1 - t) = 1 + t + t^2 + ...
        let s = RationalPoly::one().series_div(&RationalPoly::from_ints([1, -1]), 4);
        assert!(s.iter().all(|c| c == &q(1, 1)));
    }

    #[test]
    fn display_ascending() {
        let p = RationalPoly::new(vec![q(-2, 1), q(1, 1), q(0, 1), q(-3, 4)]);
        assert_eq!(p.to_string(), "-2 + t - 3/4*t^3");
    }
}
