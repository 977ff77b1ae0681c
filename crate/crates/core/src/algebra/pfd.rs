use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{AlgebraError, RationalFunction, RationalPoly};
use crate::ball::Ball;

/// `coeff / (x + shift)^order`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialFractionTerm {
    pub coeff: BigRational,
    pub shift: u32,
    pub order: u32,
}

impl PartialFractionTerm {
    pub fn new(coeff: BigRational, shift: u32, order: u32) -> Result<Self, AlgebraError> {
        if order == 0 {
            return Err(AlgebraError::ZeroOrder);
        }
        Ok(PartialFractionTerm { coeff, shift, order })
    }
}

impl fmt::Display for PartialFractionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.shift == 0 {
            "x".to_string()
        } else {
            format!("(x+{})", self.shift)
        };
        if self.order == 1 {
            write!(f, "{}/{}", self.coeff, base)
        } else {
            write!(f, "{}/{}^{}", self.coeff, base, self.order)
        }
    }
}

/// Polynomial part plus `Σ c/(x+a)^m`, with terms keyed and sorted by
/// `(shift, order)` and zero coefficients dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PartialFractionForm {
    poly_part: RationalPoly,
    terms: Vec<PartialFractionTerm>,
}

/// One coefficient-level disagreement between two partial-fraction forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermDifference {
    pub shift: u32,
    pub order: u32,
    pub left: String,
    pub right: String,
}

impl PartialFractionForm {
    pub fn new(
        poly_part: RationalPoly,
        terms: impl IntoIterator<Item = PartialFractionTerm>,
    ) -> Result<Self, AlgebraError> {
        let mut map: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
        for t in terms {
            if t.order == 0 {
                return Err(AlgebraError::ZeroOrder);
            }
            *map.entry((t.shift, t.order)).or_insert_with(BigRational::zero) += t.coeff;
        }
        Ok(Self::from_map(poly_part, map))
    }

    fn from_map(poly_part: RationalPoly, map: BTreeMap<(u32, u32), BigRational>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((shift, order), coeff)| PartialFractionTerm { coeff, shift, order })
            .collect();
        PartialFractionForm { poly_part, terms }
    }

    fn to_map(&self) -> BTreeMap<(u32, u32), BigRational> {
        self.terms
            .iter()
            .map(|t| ((t.shift, t.order), t.coeff.clone()))
            .collect()
    }

    pub fn poly_part(&self) -> &RationalPoly {
        &self.poly_part
    }

    pub fn terms(&self) -> &[PartialFractionTerm] {
        &self.terms
    }

    pub fn coeff(&self, shift: u32, order: u32) -> BigRational {
        self.terms
            .iter()
            .find(|t| t.shift == shift && t.order == order)
            .map_or_else(BigRational::zero, |t| t.coeff.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.poly_part.is_zero() && self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut map = self.to_map();
        for t in &other.terms {
            *map.entry((t.shift, t.order)).or_insert_with(BigRational::zero) += &t.coeff;
        }
        Self::from_map(&self.poly_part + &other.poly_part, map)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::from_map(
            self.poly_part.scale(s),
            self.terms
                .iter()
                .map(|t| ((t.shift, t.order), &t.coeff * s))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Term-wise `d/dx`: `c/(x+a)^m` becomes `-m c/(x+a)^{m+1}`.
    pub fn derivative(&self) -> Self {
        Self::from_map(
            self.poly_part.derivative(),
            self.terms
                .iter()
                .map(|t| {
                    let c = -&t.coeff * BigRational::from_integer(t.order.into());
                    ((t.shift, t.order + 1), c)
                })
                .collect(),
        )
    }

    pub fn nth_derivative(&self, k: u32) -> Self {
        (0..k).fold(self.clone(), |f, _| f.derivative())
    }

    /// Exact value, `None` at a pole.
    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let mut acc = self.poly_part.eval(x);
        for t in &self.terms {
            let base = x + BigRational::from_integer(t.shift.into());
            if base.is_zero() {
                return None;
            }
            acc += &t.coeff / num_traits::pow(base, t.order as usize);
        }
        Some(acc)
    }

    /// Enclosure over a ball argument, `None` if a pole may lie inside.
    pub fn eval_ball(&self, x: &Ball) -> Option<Ball> {
        let prec = x.prec();
        let mut acc = self.poly_part.eval_ball(x);
        for t in &self.terms {
            let base = x + &Ball::from_int(t.shift, prec);
            let inv = base.recip()?;
            acc = &acc + &(&inv.pow_u(t.order) * &Ball::from_rational(&t.coeff, prec));
        }
        Some(acc)
    }

    /// Coefficient-level differences against `other`, sorted by key.
    pub fn differences(&self, other: &Self) -> Vec<TermDifference> {
        let a = self.to_map();
        let b = other.to_map();
        let mut keys: Vec<(u32, u32)> = a.keys().chain(b.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let mut out: Vec<TermDifference> = keys
            .into_iter()
            .filter_map(|k| {
                let l = a.get(&k).cloned().unwrap_or_else(BigRational::zero);
                let r = b.get(&k).cloned().unwrap_or_else(BigRational::zero);
                (l != r).then(|| TermDifference {
                    shift: k.0,
                    order: k.1,
                    left: l.to_string(),
                    right: r.to_string(),
                })
            })
            .collect();
        if self.poly_part != other.poly_part {
            out.insert(
                0,
                TermDifference {
                    shift: 0,
                    order: 0,
                    left: self.poly_part.to_string(),
                    right: other.poly_part.to_string(),
                },
            );
        }
        out
    }

    /// Single reduced rational function equal to this form.
    pub fn recompose(&self) -> RationalFunction {
        let mut max_order: BTreeMap<u32, u32> = BTreeMap::new();
        for t in &self.terms {
            let e = max_order.entry(t.shift).or_insert(0);
            *e = (*e).max(t.order);
        }
        let factors: Vec<(u32, u32)> = max_order.into_iter().collect();
        let den = shifted_power_product(&factors);
        let mut num = &self.poly_part * &den;
        for t in &self.terms {
            let cofactor: Vec<(u32, u32)> = factors
                .iter()
                .map(|&(a, m)| if a == t.shift { (a, m - t.order) } else { (a, m) })
                .collect();
            num = &num + &shifted_power_product(&cofactor).scale(&t.coeff);
        }
        RationalFunction::new(num, den).expect("denominator is a nonzero product")
    }
}

impl fmt::Display for PartialFractionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.poly_part.is_zero() {
            parts.push(format!("({})", self.poly_part));
        }
        parts.extend(self.terms.iter().map(ToString::to_string));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// `Π (x + a)^m`
pub fn shifted_power_product(factors: &[(u32, u32)]) -> RationalPoly {
    factors.iter().fold(RationalPoly::one(), |acc, &(a, m)| {
        &acc * &RationalPoly::linear_shift(BigRational::from_integer(a.into())).pow(m)
    })
}

/// Decomposes `num / Π (x + a_i)^{m_i}` into partial fractions.
///
/// The shifts must be distinct and `deg num < Σ m_i`; split off a polynomial
/// part first with [`pfd_decompose_with_poly_part`] otherwise.
pub fn pfd_decompose(
    num: &RationalPoly,
    den_factors: &[(u32, u32)],
) -> Result<PartialFractionForm, AlgebraError> {
    check_factors(den_factors)?;
    let total: u32 = den_factors.iter().map(|f| f.1).sum();
    if let Some(d) = num.degree() {
        if d as u32 >= total {
            return Err(AlgebraError::DegreeTooLarge {
                numerator: d,
                denominator: total as usize,
            });
        }
    }
    let mut terms = Vec::new();
    for (i, &(a, m)) in den_factors.iter().enumerate() {
        // expand around x = -a with y = x + a
        let minus_a = -BigRational::from_integer(a.into());
        let local_num = num.taylor_shift(&minus_a);
        let others: Vec<(u32, u32)> = den_factors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, f)| *f)
            .collect();
        let local_den = shifted_power_product(&others).taylor_shift(&minus_a);
        let series = local_num.series_div(&local_den, m as usize);
        for (r, c) in series.into_iter().enumerate() {
            if !c.is_zero() {
                terms.push(PartialFractionTerm {
                    coeff: c,
                    shift: a,
                    order: m - r as u32,
                });
            }
        }
    }
    PartialFractionForm::new(RationalPoly::zero(), terms)
}

/// As [`pfd_decompose`], first dividing out the polynomial part.
pub fn pfd_decompose_with_poly_part(
    num: &RationalPoly,
    den_factors: &[(u32, u32)],
) -> Result<PartialFractionForm, AlgebraError> {
    check_factors(den_factors)?;
    let den = shifted_power_product(den_factors);
    let (quot, rem) = num.div_rem(&den);
    let fractional = pfd_decompose(&rem, den_factors)?;
    Ok(PartialFractionForm {
        poly_part: quot,
        terms: fractional.terms,
    })
}

fn check_factors(den_factors: &[(u32, u32)]) -> Result<(), AlgebraError> {
    let mut seen = std::collections::BTreeSet::new();
    for &(a, m) in den_factors {
        if m == 0 {
            return Err(AlgebraError::ZeroOrder);
        }
        if !seen.insert(a) {
            return Err(AlgebraError::RepeatedShift(a));
        }
    }
    Ok(())
}
