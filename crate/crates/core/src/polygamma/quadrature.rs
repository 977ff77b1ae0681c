//! Heuristic cross-check of the series path by numerical quadrature of
//!
//! ```text
//! ψ^{(m)}(x) = (-1)^{m+1} ∫_0^∞ t^m e^{-x t} / (1 - e^{-t}) dt
//! ```
//!
//! using the exp-sinh substitution `t = exp(π/2 · sinh u)` and trapezoidal
//! sums with successive step halving. The returned radius is the difference
//! between the last two levels: an error *estimate*, not a proof.

use num_rational::BigRational;
use num_traits::Signed;

use super::{check_order, PolygammaError};
use crate::ball::{Ball, Dyadic};

const MAX_LEVELS: u32 = 12;

/// Quadrature value with a heuristic error estimate as its radius.
#[derive(Clone, Debug)]
pub struct QuadratureEstimate {
    pub estimate: Ball,
    pub levels: u32,
    pub nodes: usize,
}

pub fn polygamma_quadrature_crosscheck(
    m: u32,
    x: &BigRational,
    prec: u32,
) -> Result<QuadratureEstimate, PolygammaError> {
    check_order(m)?;
    if !x.is_positive() {
        return Err(PolygammaError::Domain(x.to_string()));
    }
    let w = prec + 32;
    let x_ball = Ball::from_rational(x, w);
    let half_pi = Ball::pi(w).mul_pow2(-1);
    let c = std::f64::consts::FRAC_PI_2;
    let x_f = num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN);

    // Node range in u: stop where the transformed integrand drops below
    // 2^-(w+20) relative to an O(1) integral.
    let cut = (w as f64 + 20.0) * std::f64::consts::LN_2;
    let u_left = (cut / (m as f64 * c)).asinh() + 0.5;
    let mut u_right = 0.0f64;
    loop {
        let ln_t = c * u_right.sinh();
        let t = ln_t.exp();
        let ln_term = (m as f64 + 1.0) * ln_t - x_f * t + (c * u_right.cosh()).ln();
        if ln_term < -cut && t > 1.0 {
            break;
        }
        u_right += 0.0625;
        if u_right > 12.0 {
            break;
        }
    }

    let node = |u: &Dyadic| -> Ball {
        let ub = Ball::exact(u.clone(), w);
        let eu = ub.exp();
        let emu = (-&ub).exp();
        let sinh = (&eu - &emu).mul_pow2(-1);
        let cosh = (&eu + &emu).mul_pow2(-1);
        let t = (&half_pi * &sinh).exp();
        let weight = &(&half_pi * &cosh) * &t;
        // t^{m-1} e^{-xt} · t / (1 - e^{-t})
        let one_minus = -(-&t).exp_m1();
        let ratio = &t / &one_minus;
        let decay = (-(&x_ball * &t)).exp();
        &(&(&t.pow_u(m - 1) * &decay) * &ratio) * &weight
    };

    let mut total = Ball::zero(w);
    let mut nodes = 0usize;
    let mut prev: Option<Ball> = None;
    for level in 0..=MAX_LEVELS {
        // h = 2^-level; at level > 0 only odd multiples are new
        let h_exp = -(level as i64);
        let h = (level as f64 * -1.0).exp2();
        let k_lo = -(u_left / h).ceil() as i64;
        let k_hi = (u_right / h).ceil() as i64;
        for k in k_lo..=k_hi {
            if level > 0 && k % 2 == 0 {
                continue;
            }
            let u = Dyadic::from_int(k).mul_pow2(h_exp);
            total = &total + &node(&u);
            nodes += 1;
        }
        let current = total.mul_pow2(h_exp);
        if let Some(p) = prev {
            let diff = (&current - &p).mid().abs();
            let scale = current.mid().abs();
            if diff <= scale.mul(&Dyadic::pow2(-(prec as i64))) {
                let signed = if m % 2 == 1 { current } else { -current };
                let estimate = Ball::with_radius(signed.mid().clone(), diff, prec);
                return Ok(QuadratureEstimate {
                    estimate,
                    levels: level,
                    nodes,
                });
            }
        }
        prev = Some(current);
    }
    Err(PolygammaError::QuadratureFailure { levels: MAX_LEVELS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygamma::polygamma_rational;

    #[test]
    fn trigamma_at_one() {
        let x = BigRational::from_integer(1.into());
        let q = polygamma_quadrature_crosscheck(1, &x, 64).unwrap();
        let s = polygamma_rational(1, &x, 64).unwrap();
        assert!((q.estimate.to_f64() - 1.6449340668482264).abs() < 1e-10);
        assert!((q.estimate.to_f64() - s.to_f64()).abs() < 1e-10);
    }

    #[test]
    fn tetragamma_at_one_is_negative() {
        let x = BigRational::from_integer(1.into());
        let q = polygamma_quadrature_crosscheck(2, &x, 64).unwrap();
        assert!((q.estimate.to_f64() + 2.4041138063191885).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        let x = BigRational::from_integer(0.into());
        assert!(polygamma_quadrature_crosscheck(1, &x, 64).is_err());
    }
}
