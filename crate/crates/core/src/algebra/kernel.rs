//! The correspondence `c/(x+a)^m  <->  c/(m-1)! · t^{m-1} e^{-a t}` under
//! `∫_0^∞ (·) e^{-x t} dt`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{AlgebraError, ExpPoly, PartialFractionForm, PartialFractionTerm, RationalPoly};

/// `coeff · t^power · e^{-decay·t}`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KernelTerm {
    pub coeff: BigRational,
    pub power: u32,
    pub decay: u32,
}

impl fmt::Display for KernelTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        match self.power {
            0 => {}
            1 => f.write_str("*t")?,
            p => write!(f, "*t^{p}")?,
        }
        match self.decay {
            0 => Ok(()),
            1 => f.write_str("*e^{-t}"),
            a => write!(f, "*e^{{-{a}t}}"),
        }
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn laplace_kernel_of(term: &PartialFractionTerm) -> KernelTerm {
    let m = term.order;
    KernelTerm {
        coeff: &term.coeff / BigRational::from_integer(factorial(m - 1)),
        power: m - 1,
        decay: term.shift,
    }
}

/// Kernel of every fractional term; a polynomial part has no Laplace image.
pub fn laplace_kernels(form: &PartialFractionForm) -> Result<Vec<KernelTerm>, AlgebraError> {
    if !form.poly_part().is_zero() {
        return Err(AlgebraError::PolynomialPartHasNoKernel);
    }
    Ok(form.terms().iter().map(laplace_kernel_of).collect())
}

/// Inverse map back to partial fractions.
pub fn term_of_kernel(k: &KernelTerm) -> PartialFractionTerm {
    PartialFractionTerm {
        coeff: &k.coeff * BigRational::from_integer(factorial(k.power)),
        shift: k.decay,
        order: k.power + 1,
    }
}

/// `e^{shift·t} Σ kernels` as an exponential polynomial; every decay must
/// be at most `shift`.
pub fn kernels_to_exppoly(kernels: &[KernelTerm], shift: u32) -> Result<ExpPoly, AlgebraError> {
    let mut out = ExpPoly::zero();
    for k in kernels {
        if k.decay > shift {
            return Err(AlgebraError::NegativeExponent {
                decay: k.decay,
                shift,
            });
        }
        if k.coeff.is_zero() {
            continue;
        }
        out.add_block(
            shift - k.decay,
            RationalPoly::monomial(k.coeff.clone(), k.power as usize),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn thirteen_over_ninety() {
        let k = laplace_kernel_of(&PartialFractionTerm::new(q(13, 90), 1, 4).unwrap());
        assert_eq!(k, KernelTerm { coeff: q(13, 540), power: 3, decay: 1 });
    }

    #[test]
    fn reciprocal_maps_to_constant() {
        let k = laplace_kernel_of(&PartialFractionTerm::new(q(1, 1), 0, 1).unwrap());
        assert_eq!(k, KernelTerm { coeff: q(1, 1), power: 0, decay: 0 });
    }

    #[test]
    fn tenth_order_term() {
        // 1800 * 9! = 653184000
        let k = laplace_kernel_of(&PartialFractionTerm::new(q(-1, 1800), 1, 10).unwrap());
        assert_eq!(k, KernelTerm { coeff: q(-1, 653184000), power: 9, decay: 1 });
        assert_eq!(term_of_kernel(&k), PartialFractionTerm::new(q(-1, 1800), 1, 10).unwrap());
    }

    #[test]
    fn exppoly_shift_rejects_excess_decay() {
        let k = KernelTerm { coeff: q(1, 1), power: 0, decay: 3 };
        assert!(kernels_to_exppoly(&[k.clone()], 2).is_err());
        let e = kernels_to_exppoly(&[k], 3).unwrap();
        assert_eq!(e, ExpPoly::block(0, RationalPoly::one()));
    }
}
