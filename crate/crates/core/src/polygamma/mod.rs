//! Certified enclosures of the polygamma functions `ψ^{(m)}(x)`, `m >= 1`,
//! `x > 0`.
//!
//! `ψ^{(m)}(x) = (-1)^{m+1} m! ζ(m+1, x)` and the Hurwitz zeta value is
//! summed with Euler–Maclaurin:
//!
//! ```text
//! ζ(s,a) = Σ_{k<N} (a+k)^{-s} + u^{1-s}/(s-1) + u^{-s}/2
//!          + Σ_{j=1}^{M} b_{2j} (s)_{2j-1} u^{-s-2j+1} + R,      u = a + N
//! |R| <= |b_{2M}| (s)_{2M} u^{1-s-2M} / (s+2M-1)
//! ```
//!
//! with `b_{2j} = B_{2j}/(2j)!` exact and `(s)_n` the rising factorial. The
//! remainder bound is added to the radius, so the result is an enclosure for
//! every point of the input ball.

mod bernoulli;
mod quadrature;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{Ball, Dyadic};

pub use bernoulli::scaled_even_bernoulli;
pub use quadrature::{polygamma_quadrature_crosscheck, QuadratureEstimate};

/// Largest supported derivative order.
pub const MAX_ORDER: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolygammaError {
    #[error("argument must be positive, got {0}")]
    Domain(String),
    #[error("polygamma order {0} is outside 1..={MAX_ORDER}")]
    UnsupportedOrder(u32),
    #[error("could not reach {target_bits} bits for psi^({order}) within the iteration cap")]
    Precision { order: u32, target_bits: u32 },
    #[error("quadrature did not converge after {levels} refinement levels")]
    QuadratureFailure { levels: u32 },
}

/// Target accuracy and guard bits for polygamma evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub target_bits: u32,
    pub guard_bits_per_order: u32,
}

impl PrecisionPolicy {
    pub const DEFAULT_GUARD_BITS_PER_ORDER: u32 = 2;

    pub fn new(target_bits: u32) -> Self {
        PrecisionPolicy {
            target_bits: target_bits.max(8),
            guard_bits_per_order: Self::DEFAULT_GUARD_BITS_PER_ORDER,
        }
    }

    /// Working precision for order `m`: `target + 32 + guard * m`.
    pub fn working_bits(&self, m: u32) -> u32 {
        self.target_bits + 32 + self.guard_bits_per_order * m
    }

    pub fn doubled(&self) -> Self {
        PrecisionPolicy {
            target_bits: self.target_bits * 2,
            ..*self
        }
    }
}

impl From<u32> for PrecisionPolicy {
    fn from(bits: u32) -> Self {
        PrecisionPolicy::new(bits)
    }
}

fn check_order(m: u32) -> Result<(), PolygammaError> {
    if m == 0 || m > MAX_ORDER {
        Err(PolygammaError::UnsupportedOrder(m))
    } else {
        Ok(())
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// Enclosure of `ψ^{(m)}(x)` for every `x` in the ball.
pub fn polygamma(m: u32, x: &Ball, policy: impl Into<PrecisionPolicy>) -> Result<Ball, PolygammaError> {
    let policy = policy.into();
    check_order(m)?;
    if !x.is_positive() {
        return Err(PolygammaError::Domain(x.to_sci_string(10)));
    }
    let w = policy.working_bits(m);
    let z = hurwitz_zeta(m + 1, &x.with_prec(w), w, policy.target_bits)
        .ok_or(PolygammaError::Precision {
            order: m,
            target_bits: policy.target_bits,
        })?;
    let scaled = &z * &Ball::exact(Dyadic::from_int(factorial(m)), w);
    Ok(if m % 2 == 1 { scaled } else { -scaled })
}

/// Enclosure of `ψ^{(m)}(x)` at an exact rational point.
pub fn polygamma_rational(
    m: u32,
    x: &BigRational,
    policy: impl Into<PrecisionPolicy>,
) -> Result<Ball, PolygammaError> {
    let policy = policy.into();
    check_order(m)?;
    if !x.is_positive() {
        return Err(PolygammaError::Domain(x.to_string()));
    }
    let w = policy.working_bits(m);
    polygamma(m, &Ball::from_rational(x, w), policy)
}

/// `ψ^{(m)}(x)` computed as `ψ^{(m)}(x+k) - Σ_{j<k} (-1)^m m!/(x+j)^{m+1}`
/// with the correction summed exactly.
pub fn polygamma_recurrence_shift(
    m: u32,
    x: &BigRational,
    k: u32,
    policy: impl Into<PrecisionPolicy>,
) -> Result<Ball, PolygammaError> {
    let policy = policy.into();
    check_order(m)?;
    if !x.is_positive() {
        return Err(PolygammaError::Domain(x.to_string()));
    }
    let shifted = x + BigRational::from_integer(k.into());
    let upper = polygamma_rational(m, &shifted, policy)?;
    let correction = recurrence_correction(m, x, k);
    let w = upper.prec();
    Ok(&upper - &Ball::from_rational(&correction, w))
}

/// Exact `Σ_{j<k} (-1)^m m! / (x+j)^{m+1}`.
pub fn recurrence_correction(m: u32, x: &BigRational, k: u32) -> BigRational {
    let sign = if m % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    let c = BigRational::from_integer(sign * factorial(m));
    (0..k).fold(BigRational::zero(), |acc, j| {
        let base = x + BigRational::from_integer(j.into());
        acc + &c / num_traits::pow(base, (m + 1) as usize)
    })
}

/// `ζ(s, a)` for integer `s >= 2` and a ball `a` with positive lower bound.
/// Returns `None` if the requested accuracy cannot be met within the
/// iteration cap.
fn hurwitz_zeta(s: u32, a: &Ball, w: u32, target_bits: u32) -> Option<Ball> {
    let a_lo = a.lower();
    let a_lo_f = a_lo.to_f64();
    let a_hi_f = a.upper().to_f64();
    // ζ(s,a) > ∫_0^∞ (a+t)^{-s} dt = a^{1-s}/(s-1)
    let log2_floor = (1.0 - s as f64) * a_hi_f.log2() - ((s - 1) as f64).log2();
    let goal = log2_floor - w as f64 - 2.0;

    let mut n = ((w as f64) / 8.0 + s as f64 - a_lo_f).ceil().max(0.0) as u32;
    for _ in 0..24 {
        let u_lo = a_lo.add(&Dyadic::from_int(n));
        let u_lo_f = u_lo.to_f64();
        if let Some(m) = choose_corrections(s, u_lo_f, goal) {
            let bound = remainder_bound(s, m, &u_lo, w);
            let bound_log2 = bound.log2_ceil_bound().map_or(f64::NEG_INFINITY, |b| b as f64);
            if bound_log2 <= log2_floor - target_bits as f64 - 8.0 {
                return Some(em_sum(s, a, n, m, w).add_error(&bound));
            }
        }
        n = n + n / 2 + 16;
    }
    None
}

/// Smallest `M` whose estimated remainder is below `2^goal`.
fn choose_corrections(s: u32, u: f64, goal: f64) -> Option<u32> {
    let log2_two_pi = (2.0 * std::f64::consts::PI).log2();
    let log2_u = u.log2();
    let mut log2_rising = (s as f64).log2(); // (s)_1
    for m in 1..=400u32 {
        // (s)_{2m} from (s)_{2m-1}
        log2_rising += ((s + 2 * m - 1) as f64).log2();
        let est = 1.0 - 2.0 * m as f64 * log2_two_pi + log2_rising
            - ((s + 2 * m - 1) as f64).log2()
            - (s + 2 * m - 1) as f64 * log2_u;
        if est < goal {
            return Some(m);
        }
        // next (s)_{2m+1}
        log2_rising += ((s + 2 * m) as f64).log2();
    }
    None
}

fn rising(s: u32, n: u32) -> BigInt {
    (0..n).fold(BigInt::one(), |acc, i| acc * (s + i))
}

/// Rigorous upper bound on the Euler–Maclaurin remainder after `m`
/// corrections, for every `u >= u_lo`.
fn remainder_bound(s: u32, m: u32, u_lo: &Dyadic, w: u32) -> Dyadic {
    let b = scaled_even_bernoulli(m as usize)[m as usize].abs();
    let e = s + 2 * m - 1;
    let coeff = b * BigRational::from_integer(rising(s, 2 * m)) / BigRational::from_integer(e.into());
    let u_pow = Ball::exact(u_lo.clone(), w)
        .pow_u(e)
        .recip()
        .expect("u_lo > 0");
    (&u_pow * &Ball::from_rational(&coeff, w)).upper()
}

fn em_sum(s: u32, a: &Ball, n: u32, m: u32, w: u32) -> Ball {
    let mut head = Ball::zero(w);
    for k in 0..n {
        let base = a + &Ball::from_int(k, w);
        let term = base.pow_u(s).recip().expect("positive base");
        head = &head + &term;
    }
    let u = a + &Ball::from_int(n, w);
    let u_inv = u.recip().expect("positive u");
    let u_neg_s = u_inv.pow_u(s);
    // u^{1-s}/(s-1) + u^{-s}/2
    let mut tail = &(&(&u_neg_s * &u) / &Ball::from_int(s - 1, w)) + &u_neg_s.mul_pow2(-1);
    let bern = scaled_even_bernoulli(m as usize);
    let u_inv2 = u_inv.square();
    // u^{-s-2j+1} for j = 1 is u^{-s} * u
    let mut power = &u_neg_s * &u;
    for j in 1..=m {
        power = &power * &u_inv2;
        let c = &bern[j as usize] * BigRational::from_integer(rising(s, 2 * j - 1));
        tail = &tail + &(&power * &Ball::from_rational(&c, w));
    }
    &head + &tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(matches!(
            polygamma_rational(1, &int(0), 64),
            Err(PolygammaError::Domain(_))
        ));
        assert!(matches!(
            polygamma_rational(2, &q(-1, 2), 64),
            Err(PolygammaError::Domain(_))
        ));
    }

    #[test]
    fn rejects_unsupported_orders() {
        assert_eq!(
            polygamma_rational(0, &int(1), 64),
            Err(PolygammaError::UnsupportedOrder(0))
        );
        assert_eq!(
            polygamma_rational(33, &int(1), 64),
            Err(PolygammaError::UnsupportedOrder(33))
        );
    }

    #[test]
    fn trigamma_at_one_encloses_zeta_two() {
        // π²/6 from the certified π enclosure
        let v = polygamma_rational(1, &int(1), 128).unwrap();
        let pi = Ball::pi(200);
        let z2 = &pi.square() / &Ball::from_int(6, 200);
        assert!(v.overlaps(&z2));
        assert!(v.rad_f64() < 1e-38 * v.to_f64().abs());
    }

    #[test]
    fn recurrence_with_zero_shift_is_identity() {
        let a = polygamma_recurrence_shift(1, &int(3), 0, 96).unwrap();
        let b = polygamma_rational(1, &int(3), 96).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recurrence_correction_is_exact() {
        // ψ'(x+1) = ψ'(x) - 1/x^2, so the k=1 correction is -1/x^2
        assert_eq!(recurrence_correction(1, &q(1, 2), 1), int(-4));
        // ψ''(x+1) = ψ''(x) + 2/x^3
        assert_eq!(recurrence_correction(2, &int(1), 2), int(2) + q(2, 8));
    }

    #[test]
    fn ball_argument_widens_result() {
        let x = Ball::from_endpoints(&q(99, 100), &q(101, 100), 128);
        let v = polygamma(1, &x, 128).unwrap();
        let lo = polygamma_rational(1, &q(101, 100), 128).unwrap();
        let hi = polygamma_rational(1, &q(99, 100), 128).unwrap();
        assert!(v.contains(&lo) && v.contains(&hi));
    }

    #[test]
    fn small_argument_is_dominated_by_reciprocal_power() {
        // ψ'(x) = 1/x^2 + ψ'(1+x)
        let x = q(1, 1024);
        let v = polygamma_rational(1, &x, 128).unwrap();
        let rest = polygamma_rational(1, &(&x + int(1)), 128).unwrap();
        let diff = &v - &rest;
        assert!(diff.contains_rational(&int(1 << 20)));
    }
}
