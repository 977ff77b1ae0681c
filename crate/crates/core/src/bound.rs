//! The bound `B(x) = p(x) / (900 x^4 (x+1)^10)`, the functions
//!
//! ```text
//! g(x) = ψ'(x)^2 + ψ''(x) - B(x)
//! H(x) = ψ'(x) - Q(x) / (1800 x^2 (1+x)^10 (2+x)^10)
//! ```
//!
//! their derivatives, and the exact identities tying them together. Both
//! rational parts are held as exact partial-fraction forms, so every
//! derivative of them is an exact rational at a rational point and all
//! enclosure radius comes from the polygamma values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{
    pfd_decompose, shifted_power_product, AlgebraError, PartialFractionForm, RationalFunction, RationalPoly,
    TermDifference,
};
use crate::ball::{Ball, Dyadic, Sign};
use crate::constants::Constants;
use crate::polygamma::{polygamma, polygamma_rational, PolygammaError, PrecisionPolicy};

/// Default highest derivative order for `g` and `H`.
pub const DEFAULT_MAX_DERIVATIVE: u32 = 12;
/// Precision cap for sign-driven escalation.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;
/// Arguments below `2^-20` are rejected.
pub const MIN_ARGUMENT_LOG2: i64 = -20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("argument must be positive, got {0}")]
    Domain(String),
    #[error("argument {0} is below the supported minimum 2^-20")]
    BelowMinimum(String),
    #[error("derivative order {k} exceeds the configured maximum {max}")]
    DerivativeOrder { k: u32, max: u32 },
    #[error(transparent)]
    Polygamma(#[from] PolygammaError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Which of the two completely monotonic candidates to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FunctionKind {
    #[serde(rename = "g")]
    G,
    #[serde(rename = "H")]
    H,
}

impl std::fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FunctionKind::G => "g",
            FunctionKind::H => "H",
        })
    }
}

impl std::str::FromStr for FunctionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "g" => Ok(FunctionKind::G),
            "H" | "h" => Ok(FunctionKind::H),
            other => Err(format!("unknown function `{other}` (expected g or H)")),
        }
    }
}

/// Result of an exact identity check.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub holds: bool,
    /// Coefficient-level differences, empty when `holds`.
    pub differences: Vec<TermDifference>,
    pub notes: Vec<String>,
}

/// Numerical check of `g(x) - g(x+1) = (2/x^2) H(x)`.
#[derive(Clone, Debug, Serialize)]
pub struct TelescopingReport {
    pub x: String,
    pub prec: u32,
    pub lhs: String,
    pub rhs: String,
    /// `|mid(lhs) - mid(rhs)|`
    pub gap: f64,
    /// `rad(lhs) + rad(rhs)`
    pub tolerance: f64,
    pub holds: bool,
}

/// `p`, `Q` and the partial-fraction forms derived from them.
#[derive(Clone, Debug)]
pub struct BoundFunctions {
    constants: Constants,
    bound_pfd: PartialFractionForm,
    remainder_pfd: PartialFractionForm,
    max_derivative: u32,
    precision_cap: u32,
}

impl BoundFunctions {
    pub fn new(constants: Constants) -> Result<Self, BoundError> {
        let bound_pfd =
            pfd_decompose(&constants.p, &[(0, 4), (1, 10)])?.scale(&constants.scale_p.recip());
        let remainder_pfd =
            pfd_decompose(&constants.q, &[(0, 2), (1, 10), (2, 10)])?.scale(&constants.scale_q.recip());
        Ok(BoundFunctions {
            constants,
            bound_pfd,
            remainder_pfd,
            max_derivative: DEFAULT_MAX_DERIVATIVE,
            precision_cap: DEFAULT_PRECISION_CAP,
        })
    }

    pub fn embedded() -> Self {
        BoundFunctions::new(Constants::embedded().clone()).expect("embedded constants decompose")
    }

    pub fn with_max_derivative(mut self, k: u32) -> Self {
        self.max_derivative = k;
        self
    }

    pub fn with_precision_cap(mut self, bits: u32) -> Self {
        self.precision_cap = bits;
        self
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn max_derivative(&self) -> u32 {
        self.max_derivative
    }

    pub fn precision_cap(&self) -> u32 {
        self.precision_cap
    }

    /// Partial fractions of `B(x)`.
    pub fn bound_pfd(&self) -> &PartialFractionForm {
        &self.bound_pfd
    }

    /// Partial fractions of `Q(x) / (1800 x^2 (1+x)^10 (2+x)^10)`.
    pub fn remainder_pfd(&self) -> &PartialFractionForm {
        &self.remainder_pfd
    }

    pub fn p_eval(&self, x: &BigRational) -> BigRational {
        self.constants.p.eval(x)
    }

    pub fn q_eval(&self, x: &BigRational) -> BigRational {
        self.constants.q.eval(x)
    }

    /// Exact `B(x)`.
    pub fn bound_exact(&self, x: &BigRational) -> Result<BigRational, BoundError> {
        check_positive(x)?;
        let one = BigRational::one();
        let den = &self.constants.scale_p * num_traits::pow(x.clone(), 4) * num_traits::pow(x + one, 10);
        Ok(self.p_eval(x) / den)
    }

    pub fn bound_eval(&self, x: &BigRational, prec: u32) -> Result<Ball, BoundError> {
        Ok(Ball::from_rational(&self.bound_exact(x)?, prec))
    }

    /// Exact `Q(x) / (1800 x^2 (1+x)^10 (2+x)^10)`.
    pub fn remainder_exact(&self, x: &BigRational) -> Result<BigRational, BoundError> {
        check_positive(x)?;
        let one = BigRational::one();
        let two = &one + &one;
        let den = &self.constants.scale_q
            * num_traits::pow(x.clone(), 2)
            * num_traits::pow(x + one, 10)
            * num_traits::pow(x + two, 10);
        Ok(self.q_eval(x) / den)
    }

    /// `g(x)`, escalating precision until the sign is decided or the cap
    /// is reached.
    pub fn g_eval(&self, x: &BigRational, policy: impl Into<PrecisionPolicy>) -> Result<Ball, BoundError> {
        self.check_argument(x)?;
        self.escalate(policy.into(), |p| self.g_derivative(0, x, p))
    }

    /// `H(x)`, escalating like [`g_eval`](Self::g_eval).
    pub fn h_eval(&self, x: &BigRational, policy: impl Into<PrecisionPolicy>) -> Result<Ball, BoundError> {
        self.check_argument(x)?;
        self.escalate(policy.into(), |p| self.h_derivative(0, x, p))
    }

    /// Recomputes with doubled target precision while the sign stays
    /// indeterminate and the cap allows.
    pub fn escalate(
        &self,
        mut policy: PrecisionPolicy,
        f: impl Fn(PrecisionPolicy) -> Result<Ball, BoundError>,
    ) -> Result<Ball, BoundError> {
        loop {
            let v = f(policy)?;
            if v.sign() != Sign::Indeterminate || policy.target_bits * 2 > self.precision_cap {
                return Ok(v);
            }
            policy = policy.doubled();
        }
    }

    /// `g^{(k)}(x)` at a rational point.
    pub fn g_derivative(
        &self,
        k: u32,
        x: &BigRational,
        policy: impl Into<PrecisionPolicy>,
    ) -> Result<Ball, BoundError> {
        let policy = policy.into();
        self.check_order(k)?;
        self.check_argument(x)?;
        let psi: Vec<Ball> = (1..=k + 2)
            .map(|m| polygamma_rational(m, x, policy))
            .collect::<Result<_, _>>()?;
        let rational = self.bound_pfd.nth_derivative(k).eval(x).expect("x > 0 is not a pole");
        Ok(combine_g(k, &psi, &rational_ball(&rational, &psi), policy))
    }

    /// Enclosure of `g^{(k)}` over every point of the ball `x`.
    ///
    /// `d^k [ψ']^2 = Σ_j C(k,j) ψ^{(1+j)} ψ^{(1+k-j)}`, `d^k ψ'' = ψ^{(k+2)}`
    /// and `B^{(k)}` comes from the exact partial fractions.
    pub fn g_derivative_ball(
        &self,
        k: u32,
        x: &Ball,
        policy: impl Into<PrecisionPolicy>,
    ) -> Result<Ball, BoundError> {
        let policy = policy.into();
        self.check_order(k)?;
        if !x.is_positive() {
            return Err(BoundError::Domain(x.to_sci_string(10)));
        }
        let psi: Vec<Ball> = (1..=k + 2)
            .map(|m| polygamma(m, x, policy))
            .collect::<Result<_, _>>()?;
        let w = max_prec(&psi);
        let rational = self
            .bound_pfd
            .nth_derivative(k)
            .eval_ball(&x.with_prec(w))
            .ok_or_else(|| BoundError::Domain(x.to_sci_string(10)))?;
        Ok(combine_g(k, &psi, &rational, policy))
    }

    /// `H^{(k)}(x)` at a rational point.
    pub fn h_derivative(
        &self,
        k: u32,
        x: &BigRational,
        policy: impl Into<PrecisionPolicy>,
    ) -> Result<Ball, BoundError> {
        let policy = policy.into();
        self.check_order(k)?;
        self.check_argument(x)?;
        let psi = polygamma_rational(k + 1, x, policy)?;
        let rational = self.remainder_pfd.nth_derivative(k).eval(x).expect("x > 0 is not a pole");
        let r = Ball::from_rational(&rational, psi.prec());
        Ok((&psi - &r).with_prec(policy.target_bits + 16))
    }

    pub fn h_derivative_ball(
        &self,
        k: u32,
        x: &Ball,
        policy: impl Into<PrecisionPolicy>,
    ) -> Result<Ball, BoundError> {
        let policy = policy.into();
        self.check_order(k)?;
        if !x.is_positive() {
            return Err(BoundError::Domain(x.to_sci_string(10)));
        }
        let psi = polygamma(k + 1, x, policy)?;
        let r = self
            .remainder_pfd
            .nth_derivative(k)
            .eval_ball(&x.with_prec(psi.prec()))
            .ok_or_else(|| BoundError::Domain(x.to_sci_string(10)))?;
        Ok((&psi - &r).with_prec(policy.target_bits + 16))
    }

    /// `f^{(k)}(x)` for either kind.
    pub fn derivative(
        &self,
        kind: FunctionKind,
        k: u32,
        x: &BigRational,
        policy: impl Into<PrecisionPolicy>,
    ) -> Result<Ball, BoundError> {
        match kind {
            FunctionKind::G => self.g_derivative(k, x, policy),
            FunctionKind::H => self.h_derivative(k, x, policy),
        }
    }

    pub fn derivative_ball(
        &self,
        kind: FunctionKind,
        k: u32,
        x: &Ball,
        policy: impl Into<PrecisionPolicy>,
    ) -> Result<Ball, BoundError> {
        match kind {
            FunctionKind::G => self.g_derivative_ball(k, x, policy),
            FunctionKind::H => self.h_derivative_ball(k, x, policy),
        }
    }

    fn check_order(&self, k: u32) -> Result<(), BoundError> {
        if k > self.max_derivative {
            return Err(BoundError::DerivativeOrder {
                k,
                max: self.max_derivative,
            });
        }
        Ok(())
    }

    fn check_argument(&self, x: &BigRational) -> Result<(), BoundError> {
        check_positive(x)?;
        let min = Dyadic::pow2(MIN_ARGUMENT_LOG2).to_rational();
        if *x < min {
            return Err(BoundError::BelowMinimum(x.to_string()));
        }
        Ok(())
    }

    /// The expansion of `H(x) - ψ'(x)` recomputed from `p`:
    ///
    /// ```text
    /// -[1/(2x^2) + 1/x + p(x)/(1800 x^2 (x+1)^10) - x^2 p(x+1)/(1800 (x+1)^4 (x+2)^10)]
    /// ```
    ///
    /// with `1800 = 2 · scale_p`.
    pub fn expansion_from_bound(&self) -> Result<PartialFractionForm, BoundError> {
        let half_inv_scale = (&self.constants.scale_p * BigRational::from_integer(2.into())).recip();
        let first = pfd_decompose(&self.constants.p, &[(0, 2), (1, 10)])?.scale(&half_inv_scale);
        let shifted = self.constants.p.taylor_shift(&BigRational::one());
        let x2 = RationalPoly::monomial(BigRational::one(), 2);
        let second = pfd_decompose(&(&x2 * &shifted), &[(1, 4), (2, 10)])?.scale(&half_inv_scale);
        let leading = PartialFractionForm::new(
            RationalPoly::zero(),
            [
                crate::algebra::PartialFractionTerm::new(BigRational::new(1.into(), 2.into()), 0, 2)?,
                crate::algebra::PartialFractionTerm::new(BigRational::one(), 0, 1)?,
            ],
        )?;
        Ok(leading.add(&first).sub(&second).neg())
    }

    /// Checks that the expansion fixture equals the form recomputed from
    /// `p`, both term-by-term and as recomposed rational functions.
    pub fn pf_expansion_identity_check(&self) -> IdentityReport {
        let name = "expansion".to_string();
        let computed = match self.expansion_from_bound() {
            Ok(c) => c,
            Err(e) => {
                return IdentityReport {
                    name,
                    holds: false,
                    differences: vec![],
                    notes: vec![format!("decomposition failed: {e}")],
                }
            }
        };
        let fixture = &self.constants.expansion;
        let differences = fixture.differences(&computed);
        let recomposed_equal = fixture.recompose() == computed.recompose();
        let mut notes = vec![format!(
            "{} fixture terms, {} recomputed terms",
            fixture.terms().len(),
            computed.terms().len()
        )];
        notes.push(format!(
            "recomposed rational functions {}",
            if recomposed_equal { "agree" } else { "differ" }
        ));
        IdentityReport {
            name,
            holds: differences.is_empty() && recomposed_equal,
            differences,
            notes,
        }
    }

    /// Checks that `Q(x) / (1800 x^2 (1+x)^10 (2+x)^10)` has exactly the
    /// negated expansion fixture as its partial fractions, and that those
    /// recompose to the same rational function.
    pub fn remark2_identity_check(&self) -> IdentityReport {
        let name = "remark2".to_string();
        let negated = self.constants.expansion.neg();
        let differences = negated.differences(&self.remainder_pfd);
        let den = shifted_power_product(&[(0, 2), (1, 10), (2, 10)]).scale(&self.constants.scale_q);
        let target = RationalFunction::new(self.constants.q.clone(), den).expect("nonzero denominator");
        let recomposed_equal = negated.recompose() == target;
        let mut notes = vec![format!("Q has degree {:?}", self.constants.q.degree())];
        notes.push(format!(
            "recomposed expansion {} Q / (scale_q x^2 (1+x)^10 (2+x)^10)",
            if recomposed_equal { "equals" } else { "differs from" }
        ));
        IdentityReport {
            name,
            holds: differences.is_empty() && recomposed_equal,
            differences,
            notes,
        }
    }

    /// Balls for `g(x) - g(x+1)` and `(2/x^2) H(x)` at fixed precision.
    pub fn telescoping_identity_check(&self, x: &BigRational, prec: u32) -> Result<TelescopingReport, BoundError> {
        self.check_argument(x)?;
        let policy = PrecisionPolicy::new(prec);
        let one = BigRational::one();
        let lhs = &self.g_derivative(0, x, policy)? - &self.g_derivative(0, &(x + &one), policy)?;
        let factor = BigRational::from_integer(2.into()) / (x * x);
        let rhs = self.h_derivative(0, x, policy)?.mul_rational(&factor);
        let gap = (&lhs - &rhs).to_f64().abs();
        let tolerance = lhs.rad_f64() + rhs.rad_f64();
        Ok(TelescopingReport {
            x: x.to_string(),
            prec,
            lhs: lhs.to_sci_string(25),
            rhs: rhs.to_sci_string(25),
            gap,
            tolerance,
            holds: lhs.overlaps(&rhs),
        })
    }
}

fn max_prec(balls: &[Ball]) -> u32 {
    balls.iter().map(Ball::prec).max().unwrap_or(64)
}

fn rational_ball(q: &BigRational, psi: &[Ball]) -> Ball {
    Ball::from_rational(q, max_prec(psi))
}

fn combine_g(k: u32, psi: &[Ball], rational: &Ball, policy: PrecisionPolicy) -> Ball {
    let w = max_prec(psi);
    let mut acc = Ball::zero(w);
    let mut binom = BigInt::one();
    for j in 0..=k {
        let prod = &psi[j as usize] * &psi[(k - j) as usize];
        acc = &acc + &(&prod * &Ball::from_int(binom.clone(), w));
        binom = binom * (k - j) / (j + 1);
    }
    acc = &acc + &psi[(k + 1) as usize];
    (&acc - rational).with_prec(policy.target_bits + 16)
}

fn check_positive(x: &BigRational) -> Result<(), BoundError> {
    if !x.is_positive() {
        return Err(BoundError::Domain(x.to_string()));
    }
    Ok(())
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
    fn p_and_q_values() {
        let b = BoundFunctions::embedded();
        assert_eq!(b.p_eval(&int(0)), int(450));
        assert_eq!(b.p_eval(&int(1)), int(189241));
        assert_eq!(b.p_eval(&int(2)), int(8228986));
        assert_eq!(b.q_eval(&int(0)), int(1382400));
    }

    #[test]
    fn bound_exact_values() {
        let b = BoundFunctions::embedded();
        assert_eq!(b.bound_exact(&int(1)).unwrap(), q(189241, 921600));
        let den = 900 * 16 * 3i64.pow(10);
        assert_eq!(b.bound_exact(&int(2)).unwrap(), q(8228986, den));
        assert!(matches!(b.bound_exact(&int(0)), Err(BoundError::Domain(_))));
    }

    #[test]
    fn pfd_forms_match_direct_evaluation() {
        let b = BoundFunctions::embedded();
        for x in [q(1, 3), int(1), q(7, 2)] {
            assert_eq!(b.bound_pfd().eval(&x).unwrap(), b.bound_exact(&x).unwrap());
            assert_eq!(b.remainder_pfd().eval(&x).unwrap(), b.remainder_exact(&x).unwrap());
        }
    }

    #[test]
    fn g_at_one() {
        let b = BoundFunctions::embedded();
        let g = b.g_eval(&int(1), 256).unwrap();
        assert!(g.is_positive());
        assert!((g.to_f64() - 0.0963546512225458).abs() < 1e-15);
        assert!(g.rad_f64() < 1e-60);
    }

    #[test]
    fn h_values() {
        let b = BoundFunctions::embedded();
        let h1 = b.h_eval(&int(1), 128).unwrap();
        assert!(h1.is_positive());
        assert!((h1.to_f64() - 0.04710309377476614).abs() < 1e-15);
        let h_half = b.h_eval(&q(1, 2), 128).unwrap();
        assert!((h_half.to_f64() - 0.396189260156005).abs() < 1e-14);
    }

    #[test]
    fn k_zero_derivative_is_g() {
        let b = BoundFunctions::embedded();
        let a = b.g_derivative(0, &int(3), 128).unwrap();
        let c = b.g_eval(&int(3), 128).unwrap();
        assert!(a.overlaps(&c));
    }

    #[test]
    fn argument_limits() {
        let b = BoundFunctions::embedded();
        assert!(matches!(b.g_eval(&int(-1), 64), Err(BoundError::Domain(_))));
        assert!(matches!(
            b.g_eval(&q(1, 1 << 21), 64),
            Err(BoundError::BelowMinimum(_))
        ));
        assert!(matches!(
            b.g_derivative(13, &int(1), 64),
            Err(BoundError::DerivativeOrder { k: 13, max: 12 })
        ));
    }

    #[test]
    fn identities_hold() {
        let b = BoundFunctions::embedded();
        let e = b.pf_expansion_identity_check();
        assert!(e.holds, "{e:?}");
        let r = b.remark2_identity_check();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn perturbed_expansion_is_caught() {
        let text = crate::constants::EMBEDDED_CONSTANTS.replace("expansion.1.2 = 251/120", "expansion.1.2 = 371/120");
        let b = BoundFunctions::new(Constants::parse(&text).unwrap()).unwrap();
        let e = b.pf_expansion_identity_check();
        assert!(!e.holds);
        assert_eq!(e.differences.len(), 1);
        assert_eq!((e.differences[0].shift, e.differences[0].order), (1, 2));
        assert!(!b.remark2_identity_check().holds);
    }

    #[test]
    fn telescoping_at_one() {
        let b = BoundFunctions::embedded();
        let r = b.telescoping_identity_check(&int(1), 192).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.tolerance < 1e-50);
    }
}
