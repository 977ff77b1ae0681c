use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{AlgebraError, RationalPoly};
use crate::ball::{Ball, Dyadic};

/// Exponential polynomial `Σ_k p_k(t) e^{k t}` over nonnegative integer
/// exponents `k`. Zero blocks are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExpPoly {
    terms: BTreeMap<u32, RationalPoly>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    /// `p(t) e^{k t}`
    pub fn block(k: u32, p: RationalPoly) -> Self {
        let mut e = ExpPoly::zero();
        e.add_block(k, p);
        e
    }

    pub fn from_blocks(blocks: impl IntoIterator<Item = (u32, RationalPoly)>) -> Self {
        let mut e = ExpPoly::zero();
        for (k, p) in blocks {
            e.add_block(k, p);
        }
        e
    }

    /// Adds `p(t) e^{k t}` in place, pruning a cancelled block.
    pub fn add_block(&mut self, k: u32, p: RationalPoly) {
        if p.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&k) {
            Some(old) => &old + &p,
            None => p,
        };
        if !sum.is_zero() {
            self.terms.insert(k, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient polynomial of `e^{k t}` (zero if absent).
    pub fn coeff(&self, k: u32) -> RationalPoly {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn blocks(&self) -> impl Iterator<Item = (u32, &RationalPoly)> {
        self.terms.iter().map(|(k, p)| (*k, p))
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.keys().copied()
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return ExpPoly::zero();
        }
        ExpPoly {
            terms: self.terms.iter().map(|(k, p)| (*k, p.scale(s))).collect(),
        }
    }

    /// `d/dt`: each block `p e^{kt}` becomes `(p' + k p) e^{kt}`.
    pub fn derivative(&self) -> Self {
        ExpPoly::from_blocks(self.terms.iter().map(|(k, p)| {
            let kp = p.scale(&BigRational::from_integer((*k).into()));
            (*k, &p.derivative() + &kp)
        }))
    }

    /// Multiplication by `e^{k t}`.
    pub fn mul_exp(&self, k: u32) -> Self {
        ExpPoly {
            terms: self.terms.iter().map(|(j, p)| (j + k, p.clone())).collect(),
        }
    }

    /// Exact quotient `self / (s e^{k t})`.
    pub fn factor_exp(&self, k: u32, s: &BigRational) -> Result<Self, AlgebraError> {
        if s.is_zero() {
            return Err(AlgebraError::ZeroScale);
        }
        if let Some(&low) = self.terms.keys().next() {
            if low < k {
                return Err(AlgebraError::NotDivisible { exponent: low, factor: k });
            }
        }
        let inv = s.recip();
        Ok(ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|(j, p)| (j - k, p.scale(&inv)))
                .collect(),
        })
    }

    /// Exact value at `t = 0`.
    pub fn value_at_zero(&self) -> BigRational {
        self.terms
            .values()
            .fold(BigRational::zero(), |acc, p| acc + p.coeff(0))
    }

    /// Enclosure of the value at `t0`. Each `e^{k t0}` is computed once with
    /// the ball exponential and the polynomial blocks exactly by Horner.
    pub fn eval(&self, t0: &BigRational, prec: u32) -> Ball {
        if t0.is_zero() {
            let v = self.value_at_zero();
            return match Dyadic::from_rational_exact(&v) {
                Some(d) => Ball::exact(d, prec),
                None => Ball::from_rational(&v, prec),
            };
        }
        let w = prec + 16 + 4 * self.terms.len() as u32;
        let mut acc = Ball::zero(w);
        for (k, p) in &self.terms {
            let pv = p.eval(t0);
            if pv.is_zero() {
                continue;
            }
            let e = if *k == 0 {
                Ball::one(w)
            } else {
                let arg = t0 * BigRational::from_integer((*k).into());
                Ball::from_rational(&arg, w + 16).exp().with_prec(w)
            };
            acc = &acc + &(&e * &Ball::from_rational(&pv, w));
        }
        acc.with_prec(prec)
    }

    /// Largest absolute difference position: first `(k, i)` where the
    /// coefficients of `t^i e^{kt}` differ.
    pub fn first_difference(&self, other: &ExpPoly) -> Option<(u32, usize, BigRational, BigRational)> {
        let mut keys: Vec<u32> = self.exponents().chain(other.exponents()).collect();
        keys.sort_unstable_by(|a, b| b.cmp(a));
        keys.dedup();
        for k in keys {
            let a = self.coeff(k);
            let b = other.coeff(k);
            let n = a.coeffs().len().max(b.coeffs().len());
            for i in 0..n {
                let (x, y) = (a.coeff(i), b.coeff(i));
                if x != y {
                    return Some((k, i, x, y));
                }
            }
        }
        None
    }

    /// True if every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(RationalPoly::is_integral)
    }
}

impl Add<&ExpPoly> for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (k, p) in &rhs.terms {
            out.add_block(*k, p.clone());
        }
        out
    }
}

impl Sub<&ExpPoly> for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &(-rhs)
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale(&-BigRational::one())
    }
}

impl Mul<&ExpPoly> for &ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (i, p) in &self.terms {
            for (j, q) in &rhs.terms {
                out.add_block(i + j, p * q);
            }
        }
        out
    }
}

impl fmt::Display for ExpPoly {
    /// Descending exponents, e.g. `(-2 + t)*e^{3t} + (5)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (k, p)) in self.terms.iter().rev().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            match k {
                0 => write!(f, "({p})")?,
                1 => write!(f, "({p})*e^t")?,
                _ => write!(f, "({p})*e^{{{k}t}}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn derivative_of_exponential_is_itself() {
        let e = ExpPoly::block(1, RationalPoly::one());
        assert_eq!(e.derivative(), e);
    }

    #[test]
    fn derivative_of_top_theta_block() {
        let e = ExpPoly::block(3, RationalPoly::from_ints([-2, 1]).scale(&int(163296000)));
        let d = ExpPoly::block(3, RationalPoly::from_ints([-5, 3]).scale(&int(163296000)));
        assert_eq!(e.derivative(), d);
    }

    #[test]
    fn monomial_product() {
        let a = ExpPoly::block(0, RationalPoly::from_ints([0, 1]));
        let b = ExpPoly::block(2, RationalPoly::one());
        assert_eq!(&a * &b, ExpPoly::block(2, RationalPoly::from_ints([0, 1])));
    }

    #[test]
    fn cancelled_blocks_are_pruned() {
        let a = ExpPoly::from_blocks([(0, RationalPoly::one()), (1, RationalPoly::one())]);
        let d = &a - &ExpPoly::block(1, RationalPoly::one());
        assert_eq!(d.exponents().collect::<Vec<_>>(), vec![0]);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn factor_exp_shifts_and_scales() {
        let e = ExpPoly::block(2, RationalPoly::from_ints([0, 1]));
        assert_eq!(
            e.factor_exp(2, &int(1)).unwrap(),
            ExpPoly::block(0, RationalPoly::from_ints([0, 1]))
        );
        let f = ExpPoly::from_blocks([(1, RationalPoly::from_ints([512])), (3, RationalPoly::from_ints([0, 1024]))]);
        let g = f.factor_exp(1, &int(512)).unwrap();
        assert_eq!(g, ExpPoly::from_blocks([(0, RationalPoly::one()), (2, RationalPoly::from_ints([0, 2]))]));
        assert_eq!(g.scale(&int(512)).mul_exp(1), f);
    }

    #[test]
    fn factor_exp_rejects_low_exponent() {
        let e = ExpPoly::from_blocks([(0, RationalPoly::one()), (2, RationalPoly::one())]);
        assert!(matches!(
            e.factor_exp(1, &int(1)),
            Err(AlgebraError::NotDivisible { exponent: 0, factor: 1 })
        ));
    }

    #[test]
    fn eval_constant_is_exact() {
        let e = ExpPoly::block(0, RationalPoly::from_ints([5]));
        let v = e.eval(&int(7), 64);
        assert!(v.contains_rational(&int(5)));
        assert!(v.is_exact());
    }

    #[test]
    fn eval_at_zero_is_exact() {
        let e = ExpPoly::from_blocks([(3, RationalPoly::from_ints([-2, 1])), (0, RationalPoly::from_ints([2, 9]))]);
        let v = e.eval(&int(0), 64);
        assert!(v.is_exact());
        assert!(v.contains_rational(&int(0)));
    }
}
