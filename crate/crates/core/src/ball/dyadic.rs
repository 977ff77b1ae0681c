use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact binary floating value `mantissa * 2^exponent`.
///
/// The mantissa is kept odd (or zero with exponent 0) so structural equality
/// coincides with numeric equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            Dyadic { mant, exp }
        } else {
            Dyadic {
                mant: mant >> tz,
                exp: exp + tz as i64,
            }
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Self::new(v.into(), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: e,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// Bit length of the mantissa magnitude.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Strict upper bound on `log2 |self|`; `None` for zero.
    pub fn log2_ceil_bound(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.bits() as i64)
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Returns `Some` when `q` has a power-of-two denominator.
    pub fn from_rational_exact(q: &BigRational) -> Option<Dyadic> {
        let den = q.denom();
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> tz as usize).is_one() {
            Some(Dyadic::new(q.numer().clone(), -(tz as i64)))
        } else {
            None
        }
    }

    /// Truncates `q` toward zero to a dyadic with roughly `bits` significant
    /// bits. Returns the value and an upper bound on the truncation error.
    pub fn from_rational_trunc(q: &BigRational, bits: u32) -> (Dyadic, Dyadic) {
        if let Some(d) = Dyadic::from_rational_exact(q) {
            let (r, err) = d.round(bits);
            return (r, err);
        }
        let num = q.numer();
        let den = q.denom();
        let shift = bits as i64 + den.bits() as i64 - num.bits() as i64 + 1;
        let (n, d) = if shift >= 0 {
            (num << shift as usize, den.clone())
        } else {
            (num.clone(), den << (-shift) as usize)
        };
        let m = truncating_div(&n, &d);
        (Dyadic::new(m, -shift), Dyadic::pow2(-shift))
    }

    /// Truncates the mantissa toward zero to at most `prec` bits. Returns the
    /// rounded value and the exact discarded amount (as a magnitude).
    pub fn round(&self, prec: u32) -> (Dyadic, Dyadic) {
        let b = self.bits();
        if b <= prec as u64 {
            return (self.clone(), Dyadic::zero());
        }
        let shift = b - prec as u64;
        let mag = self.mant.magnitude();
        let kept = mag >> shift as usize;
        let dropped = mag - (&kept << shift as usize);
        let sign = self.mant.sign();
        let kept = BigInt::from_biguint(sign_or_plus(sign), kept);
        (
            Dyadic::new(kept, self.exp + shift as i64),
            Dyadic::new(BigInt::from(dropped), self.exp),
        )
    }

    /// Smallest dyadic with at most `prec` mantissa bits that is `>= self`,
    /// for nonnegative `self`.
    pub fn round_up(&self, prec: u32) -> Dyadic {
        debug_assert!(!self.is_negative());
        let b = self.bits();
        if b <= prec as u64 {
            return self.clone();
        }
        let shift = b - prec as u64;
        let kept = (&self.mant >> shift as usize) + 1u32;
        Dyadic::new(kept, self.exp + shift as i64)
    }

    /// Upper bound on `n / d` with about `prec` bits, for `n >= 0`, `d > 0`.
    pub fn div_up(n: &Dyadic, d: &Dyadic, prec: u32) -> Dyadic {
        debug_assert!(d.is_positive() && !n.is_negative());
        if n.is_zero() {
            return Dyadic::zero();
        }
        let k = prec as i64 + d.bits() as i64 - n.bits() as i64 + 1;
        let q = if k >= 0 {
            (&n.mant << k as usize).div_floor(&d.mant)
        } else {
            n.mant.div_floor(&(&d.mant << (-k) as usize))
        } + 1u32;
        Dyadic::new(q, n.exp - d.exp - k)
    }

    /// Truncated quotient with about `prec` bits and an error bound.
    pub fn div_trunc(n: &Dyadic, d: &Dyadic, prec: u32) -> (Dyadic, Dyadic) {
        debug_assert!(!d.is_zero());
        if n.is_zero() {
            return (Dyadic::zero(), Dyadic::zero());
        }
        let k = prec as i64 + d.bits() as i64 - n.bits() as i64 + 1;
        let q = if k >= 0 {
            truncating_div(&(&n.mant << k as usize), &d.mant)
        } else {
            truncating_div(&n.mant, &(&d.mant << (-k) as usize))
        };
        let e = n.exp - d.exp - k;
        (Dyadic::new(q, e), Dyadic::pow2(e))
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (r, _) = self.round(60);
        let m = r.mant.to_f64().unwrap_or(f64::NAN);
        ldexp(m, r.exp)
    }

    /// Dyadic value of a finite `f64` (exact).
    pub fn from_f64(v: f64) -> Option<Dyadic> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Some(Dyadic::new(BigInt::from(m) * sign, e))
    }
}

fn sign_or_plus(s: BigSign) -> BigSign {
    if s == BigSign::NoSign {
        BigSign::Plus
    } else {
        s
    }
}

fn truncating_div(n: &BigInt, d: &BigInt) -> BigInt {
    n / d
}

pub(crate) fn ldexp(mut m: f64, mut e: i64) -> f64 {
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.sub(other);
        d.mant.sign().cmp(&BigSign::NoSign)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}
