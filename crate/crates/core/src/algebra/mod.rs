//! Exact rational algebra: polynomials, exponential polynomials, partial
//! fractions over shifted linear factors, and their Laplace kernels.

mod exppoly;
mod kernel;
mod pfd;
mod poly;

use std::fmt;

use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

pub use exppoly::ExpPoly;
pub use kernel::{kernels_to_exppoly, laplace_kernel_of, laplace_kernels, term_of_kernel, KernelTerm};
pub use pfd::{
    pfd_decompose, pfd_decompose_with_poly_part, shifted_power_product, PartialFractionForm,
    PartialFractionTerm, TermDifference,
};
pub use poly::RationalPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("exponent e^{{{exponent}t}} is not divisible by e^{{{factor}t}}")]
    NotDivisible { exponent: u32, factor: u32 },
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("numerator degree {numerator} is not below denominator degree {denominator}")]
    DegreeTooLarge { numerator: usize, denominator: usize },
    #[error("denominator shift {0} appears more than once")]
    RepeatedShift(u32),
    #[error("partial fraction order must be at least 1")]
    ZeroOrder,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("a polynomial part has no Laplace kernel")]
    PolynomialPartHasNoKernel,
    #[error("kernel decay {decay} exceeds exponent shift {shift}")]
    NegativeExponent { decay: u32, shift: u32 },
}

/// Reduced quotient of polynomials: numerator and denominator coprime,
/// denominator monic. The representation is unique, so `==` is equality of
/// rational functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: RationalPoly,
    den: RationalPoly,
}

impl RationalFunction {
    pub fn new(num: RationalPoly, den: RationalPoly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RationalFunction {
                num,
                den: RationalPoly::one(),
            });
        }
        let g = num.gcd(&den);
        let (n, _) = num.div_rem(&g);
        let (d, _) = den.div_rem(&g);
        let lead = d.leading().expect("nonzero").recip();
        Ok(RationalFunction {
            num: n.scale(&lead),
            den: d.scale(&lead),
        })
    }

    pub fn from_poly(p: RationalPoly) -> Self {
        RationalFunction {
            num: p,
            den: RationalPoly::one(),
        }
    }

    pub fn num(&self) -> &RationalPoly {
        &self.num
    }

    pub fn den(&self) -> &RationalPoly {
        &self.den
    }

    pub fn add(&self, o: &Self) -> Self {
        let num = &(&self.num * &o.den) + &(&o.num * &self.den);
        Self::new(num, &self.den * &o.den).expect("nonzero")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-BigRational::one()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.num * &o.num, &self.den * &o.den).expect("nonzero")
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.num.scale(s), self.den.clone()).expect("nonzero")
    }

    /// `f(x + a)`
    pub fn taylor_shift(&self, a: &BigRational) -> Self {
        Self::new(self.num.taylor_shift(a), self.den.taylor_shift(a)).expect("nonzero")
    }
}

/// Recomposes a partial-fraction form into `(numerator, denominator)`,
/// reduced with a monic denominator.
pub fn pfd_recompose(f: &PartialFractionForm) -> (RationalPoly, RationalPoly) {
    let r = f.recompose();
    (r.num, r.den)
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_representation_is_unique() {
        // (2x + 2) / (4x^2 + 4x) == 1 / (2x)
        let a = RationalFunction::new(
            RationalPoly::from_ints([2, 2]),
            RationalPoly::from_ints([0, 4, 4]),
        )
        .unwrap();
        let b = RationalFunction::new(RationalPoly::from_ints([1]), RationalPoly::from_ints([0, 2])).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.den(), &RationalPoly::from_ints([0, 1]));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(
            RationalFunction::new(RationalPoly::one(), RationalPoly::zero()),
            Err(AlgebraError::ZeroDenominator)
        );
    }
}
