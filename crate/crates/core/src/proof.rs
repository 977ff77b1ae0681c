//! Exact replay of the positivity argument for the Laplace integrand of
//! `H`:
//!
//! ```text
//! H(x) = 1/653184000 ∫_0^∞ θ(t) e^{-(x+2)t} / (e^t - 1) dt
//! θ^{(10)}   = e^t θ₁
//! θ₁^{(10)}  = 512 e^t θ₂
//! ```
//!
//! `θ` is rebuilt from the Laplace kernels of the partial-fraction
//! expansion, differentiated exactly down the chain, compared with the
//! transcribed displays and initial values, and the positivity induction is
//! emitted as a step-by-step certificate.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{kernels_to_exppoly, laplace_kernels, AlgebraError, ExpPoly, RationalPoly};
use crate::ball::Sign;
use crate::bound::BoundFunctions;
use crate::constants::Constants;

/// `1800 · 9!`, the normalisation of θ.
pub const THETA_SCALE: u64 = 653_184_000;
/// Scalar in `θ₁^{(10)} = 512 e^t θ₂`.
pub const THETA2_FACTOR: u64 = 512;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error("{stage} differs from its fixture at t^{power} e^{{{exponent}t}}: expected {expected}, computed {computed}")]
    FixtureMismatch {
        stage: String,
        exponent: u32,
        power: usize,
        expected: String,
        computed: String,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("unknown stage `{0}`")]
    UnknownStage(String),
    #[error("sign of {stage} at t = {t} is indeterminate at {prec} bits")]
    IndeterminateSign { stage: String, t: String, prec: u32 },
}

/// `theta`, `theta1` or `theta2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThetaLevel {
    Theta,
    Theta1,
    Theta2,
}

impl ThetaLevel {
    fn name(self) -> &'static str {
        match self {
            ThetaLevel::Theta => "theta",
            ThetaLevel::Theta1 => "theta1",
            ThetaLevel::Theta2 => "theta2",
        }
    }

    fn max_derivative(self) -> u32 {
        match self {
            ThetaLevel::Theta2 => 9,
            _ => 10,
        }
    }
}

/// One function in the chain, e.g. `theta1_d4` for `θ₁^{(4)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StageId {
    pub level: ThetaLevel,
    pub derivative: u32,
}

impl StageId {
    pub fn new(level: ThetaLevel, derivative: u32) -> Self {
        StageId { level, derivative }
    }
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.derivative {
            0 => f.write_str(self.level.name()),
            d => write!(f, "{}_d{d}", self.level.name()),
        }
    }
}

impl FromStr for StageId {
    type Err = ProofError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ProofError::UnknownStage(s.to_string());
        let (base, derivative) = match s.split_once("_d") {
            Some((b, d)) => (b, d.parse::<u32>().map_err(|_| unknown())?),
            None => (s, 0),
        };
        let level = match base {
            "theta" => ThetaLevel::Theta,
            "theta1" => ThetaLevel::Theta1,
            "theta2" => ThetaLevel::Theta2,
            _ => return Err(unknown()),
        };
        if derivative > level.max_derivative() {
            return Err(unknown());
        }
        Ok(StageId { level, derivative })
    }
}

/// `653184000 · [t e^{3t} + (e^{3t} - e^{2t}) K(t)]`, where `K` is the
/// Laplace image of the expansion of `H(x) - ψ'(x)`.
pub fn theta_from_kernel(constants: &Constants) -> Result<ExpPoly, AlgebraError> {
    let kernels = laplace_kernels(&constants.expansion)?;
    let k3 = kernels_to_exppoly(&kernels, 3)?;
    let k2 = kernels_to_exppoly(&kernels, 2)?;
    let t_e3 = ExpPoly::block(3, RationalPoly::from_ints([0, 1]));
    let inner = &(&t_e3 + &k3) - &k2;
    Ok(inner.scale(&BigRational::from_integer(THETA_SCALE.into())))
}

/// [`theta_from_kernel`], checked block by block against the θ fixture.
pub fn build_theta_from_kernel(constants: &Constants) -> Result<ExpPoly, ProofError> {
    let theta = theta_from_kernel(constants)?;
    compare_fixture(constants, "theta", &theta)?;
    Ok(theta)
}

fn compare_fixture(constants: &Constants, name: &str, computed: &ExpPoly) -> Result<(), ProofError> {
    let fixture = constants
        .exppoly_fixture(name)
        .ok_or_else(|| ProofError::UnknownStage(name.to_string()))?;
    match fixture.first_difference(computed) {
        None => Ok(()),
        Some((exponent, power, expected, computed)) => Err(ProofError::FixtureMismatch {
            stage: name.to_string(),
            exponent,
            power,
            expected: expected.to_string(),
            computed: computed.to_string(),
        }),
    }
}

/// `θ`, `θ₁ = θ^{(10)} e^{-t}`, `θ₂ = θ₁^{(10)} e^{-t} / 512` and their
/// derivatives, all exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaChain {
    pub theta: ExpPoly,
    pub theta_derivs: Vec<ExpPoly>,
    pub theta1: ExpPoly,
    pub theta1_derivs: Vec<ExpPoly>,
    pub theta2: ExpPoly,
    pub theta2_derivs: Vec<ExpPoly>,
}

fn derivative_chain(f: &ExpPoly, n: usize) -> Vec<ExpPoly> {
    let mut out: Vec<ExpPoly> = Vec::with_capacity(n);
    for i in 0..n {
        let next = if i == 0 { f.derivative() } else { out[i - 1].derivative() };
        out.push(next);
    }
    out
}

impl ThetaChain {
    pub fn from_theta(theta: ExpPoly) -> Result<Self, ProofError> {
        let theta_derivs = derivative_chain(&theta, 10);
        let theta1 = theta_derivs[9].factor_exp(1, &BigRational::one())?;
        let theta1_derivs = derivative_chain(&theta1, 10);
        let theta2 = theta1_derivs[9].factor_exp(1, &BigRational::from_integer(THETA2_FACTOR.into()))?;
        let theta2_derivs = derivative_chain(&theta2, 9);
        Ok(ThetaChain {
            theta,
            theta_derivs,
            theta1,
            theta1_derivs,
            theta2,
            theta2_derivs,
        })
    }

    /// Chain built from the kernel construction (not from the θ fixture).
    pub fn build(constants: &Constants) -> Result<Self, ProofError> {
        ThetaChain::from_theta(theta_from_kernel(constants)?)
    }

    pub fn stage(&self, id: StageId) -> Option<&ExpPoly> {
        let (base, derivs) = match id.level {
            ThetaLevel::Theta => (&self.theta, &self.theta_derivs),
            ThetaLevel::Theta1 => (&self.theta1, &self.theta1_derivs),
            ThetaLevel::Theta2 => (&self.theta2, &self.theta2_derivs),
        };
        match id.derivative {
            0 => Some(base),
            d => derivs.get(d as usize - 1),
        }
    }

    /// Exact value at `t = 0`.
    pub fn initial(&self, id: StageId) -> Option<BigRational> {
        self.stage(id).map(ExpPoly::value_at_zero)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    fn of(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

/// One line of a certificate. Field order is the serialisation order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateStep {
    pub step: String,
    pub claim: String,
    pub method: String,
    pub exact_values_used: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub verdict: Verdict,
    pub steps: Vec<CertificateStep>,
    pub trace: Vec<String>,
}

impl CertificateReport {
    fn from_steps(steps: Vec<CertificateStep>) -> Self {
        let verdict = if steps.iter().all(|s| s.verdict == Verdict::Pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        let trace = steps
            .iter()
            .map(|s| {
                let mut line = format!("[{}] {}: {}", s.verdict, s.step, s.claim);
                if let Some(f) = s.failures.first() {
                    line.push_str(&format!(" ({f})"));
                }
                line
            })
            .collect();
        CertificateReport { verdict, steps, trace }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// The first failed step, if any.
    pub fn first_failure(&self) -> Option<&CertificateStep> {
        self.steps.iter().find(|s| s.verdict == Verdict::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

struct StepBuilder {
    values: Vec<String>,
    failures: Vec<String>,
}

impl StepBuilder {
    fn new() -> Self {
        StepBuilder {
            values: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, failure: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(failure());
        }
    }

    fn fixture(&mut self, constants: &Constants, name: &str, computed: Option<&ExpPoly>) {
        match computed {
            None => self.failures.push(format!("{name} not computed")),
            Some(c) => match compare_fixture(constants, name, c) {
                Ok(()) => self.values.push(format!("{name} = {c}")),
                Err(e) => self.failures.push(e.to_string()),
            },
        }
    }

    /// Table entry `initial.<id>` equals the computed value and is `>= 0`.
    fn initial(&mut self, constants: &Constants, chain: Option<&ThetaChain>, id: StageId) {
        let name = id.to_string();
        let Some(table) = constants.initial_value(&name) else {
            self.failures.push(format!("{name}(0) missing from table"));
            return;
        };
        self.values.push(format!("{name}(0) = {table}"));
        if let Some(computed) = chain.and_then(|c| c.initial(id)) {
            self.require(&computed == table, || {
                format!("{name}(0): table {table}, computed {computed}")
            });
        }
        self.require(!table.is_negative(), || format!("{name}(0) = {table} is negative"));
    }

    fn finish(self, step: &str, claim: String, method: &str) -> CertificateStep {
        CertificateStep {
            step: step.to_string(),
            claim,
            method: method.to_string(),
            exact_values_used: self.values,
            verdict: Verdict::of(self.failures.is_empty()),
            failures: self.failures,
        }
    }
}

/// Sufficient condition for `f(t) > 0` on `t >= 0`: every block with
/// `k >= 1` has nonnegative coefficients, and `Σ_k p_k(t)` has nonnegative
/// coefficients and a positive constant term (using `e^{kt} >= 1`).
pub fn coefficientwise_positive(f: &ExpPoly) -> Result<RationalPoly, String> {
    let mut sum = RationalPoly::zero();
    for (k, p) in f.blocks() {
        if k >= 1 && !p.all_coeffs_nonnegative() {
            return Err(format!("block e^{{{k}t}} has a negative coefficient"));
        }
        sum = &sum + p;
    }
    if !sum.all_coeffs_nonnegative() || !sum.coeff(0).is_positive() {
        return Err(format!("lower bound {sum} is not positive at t = 0"));
    }
    Ok(sum)
}

/// Compares the computed chain with the five transcribed displays.
pub fn verify_derivative_fixtures(constants: &Constants, chain: &ThetaChain) -> CertificateStep {
    let mut b = StepBuilder::new();
    for name in ["theta_d1", "theta_d10", "theta1_d1", "theta1_d10", "theta2_d9"] {
        let id: StageId = name.parse().expect("fixture names are stage ids");
        b.fixture(constants, name, chain.stage(id));
    }
    b.finish(
        "fixtures",
        "computed θ', θ^(10), θ₁', θ₁^(10), θ₂^(9) equal their displays".into(),
        "structural equality of exact exponential polynomials",
    )
}

/// Compares all 29 tabulated initial values and `θ^{(i)}(0) = 0` for
/// `i <= 4`.
pub fn verify_initial_values(constants: &Constants, chain: &ThetaChain) -> CertificateStep {
    let mut b = StepBuilder::new();
    for label in crate::constants::initial_value_labels() {
        let id: StageId = label.parse().expect("table labels are stage ids");
        b.initial(constants, Some(chain), id);
    }
    for i in 0..=4 {
        let id = StageId::new(ThetaLevel::Theta, i);
        let v = chain.initial(id).expect("stage exists");
        b.require(v.is_zero(), || format!("{id}(0) = {v}, expected 0"));
    }
    b.finish(
        "initial-values",
        "all tabulated values at t = 0 match; θ(0) = θ'(0) = ... = θ^(4)(0) = 0".into(),
        "exact evaluation of each block at t = 0",
    )
}

fn skip_after_failure(steps: &mut [CertificateStep]) {
    if let Some(i) = steps.iter().position(|s| s.verdict == Verdict::Fail) {
        for s in &mut steps[i + 1..] {
            s.verdict = Verdict::Skipped;
            s.failures.clear();
        }
    }
}

/// The full certificate: fixture and table checks followed by the five
/// positivity steps. Steps after the first failure are marked skipped.
pub fn chain_positivity_certificate(bounds: &BoundFunctions) -> CertificateReport {
    let constants = bounds.constants();
    let chain = ThetaChain::build(constants);
    let chain_ref = chain.as_ref().ok();
    let mut steps = Vec::new();

    let stage = |level, d| chain_ref.and_then(|c| c.stage(StageId::new(level, d)));
    let chain_error = |b: &mut StepBuilder| {
        if let Err(e) = &chain {
            b.failures.push(format!("chain construction failed: {e}"));
        }
    };

    // 1. bottom stage
    {
        let mut b = StepBuilder::new();
        chain_error(&mut b);
        b.fixture(constants, "theta2_d9", stage(ThetaLevel::Theta2, 9));
        if let Some(f) = stage(ThetaLevel::Theta2, 9) {
            match coefficientwise_positive(f) {
                Ok(lower) => b.values.push(format!("theta2_d9(t) >= {lower} for t >= 0")),
                Err(e) => b.failures.push(format!("theta2_d9: {e}")),
            }
        }
        b.initial(constants, chain_ref, StageId::new(ThetaLevel::Theta2, 9));
        steps.push(b.finish(
            "1",
            "θ₂^(9)(t) > 0 for t >= 0".into(),
            "coefficient signs with e^{kt} >= 1 and t >= 0; exact integer comparison",
        ));
    }

    // 2. θ₂ induction
    {
        let mut b = StepBuilder::new();
        chain_error(&mut b);
        for i in (1..=8).rev() {
            b.initial(constants, chain_ref, StageId::new(ThetaLevel::Theta2, i));
        }
        if let Some(v) = chain_ref.and_then(|c| c.initial(StageId::new(ThetaLevel::Theta2, 0))) {
            b.values.push(format!("theta2(0) = {v}"));
            b.require(v.is_positive(), || format!("theta2(0) = {v} is not positive"));
        }
        steps.push(b.finish(
            "2",
            "θ₂^(i)(t) > 0 on (0,∞) for i = 8, ..., 0".into(),
            "f' > 0 on (0,∞) and f(0) >= 0 imply f > 0 on (0,∞), applied downward from θ₂^(9)",
        ));
    }

    // 3. θ₁ chain
    {
        let mut b = StepBuilder::new();
        chain_error(&mut b);
        b.fixture(constants, "theta1_d10", stage(ThetaLevel::Theta1, 10));
        if let Some(f) = stage(ThetaLevel::Theta1, 10) {
            b.require(f.coeff(0).is_zero(), || "theta1_d10 has an e^{0t} block".into());
            let factor = BigRational::from_integer(BigInt::from(THETA2_FACTOR));
            b.require(
                f.blocks().all(|(_, p)| p.scale(&factor.recip()).is_integral()),
                || format!("theta1_d10 coefficients are not divisible by {THETA2_FACTOR}"),
            );
            b.values.push(format!("theta1_d10 = {THETA2_FACTOR} e^t theta2"));
        }
        b.fixture(constants, "theta1_d1", stage(ThetaLevel::Theta1, 1));
        for i in (1..=10).rev() {
            b.initial(constants, chain_ref, StageId::new(ThetaLevel::Theta1, i));
        }
        if let Some(v) = chain_ref.and_then(|c| c.initial(StageId::new(ThetaLevel::Theta1, 0))) {
            b.values.push(format!("theta1(0) = {v}"));
            b.require(!v.is_negative(), || format!("theta1(0) = {v} is negative"));
        }
        steps.push(b.finish(
            "3",
            "θ₁^(10) = 512 e^t θ₂ > 0, hence θ₁^(i) > 0 on (0,∞) for i = 9, ..., 0".into(),
            "exact factorisation of the e^t block, then the same induction",
        ));
    }

    // 4. θ chain
    {
        let mut b = StepBuilder::new();
        chain_error(&mut b);
        b.fixture(constants, "theta_d10", stage(ThetaLevel::Theta, 10));
        if let Some(f) = stage(ThetaLevel::Theta, 10) {
            b.require(f.coeff(0).is_zero(), || "theta_d10 has an e^{0t} block".into());
            b.values.push("theta_d10 = e^t theta1".into());
        }
        b.fixture(constants, "theta_d1", stage(ThetaLevel::Theta, 1));
        b.fixture(constants, "theta", stage(ThetaLevel::Theta, 0));
        for i in (1..=10).rev() {
            b.initial(constants, chain_ref, StageId::new(ThetaLevel::Theta, i));
        }
        if let Some(v) = chain_ref.and_then(|c| c.initial(StageId::new(ThetaLevel::Theta, 0))) {
            b.values.push(format!("theta(0) = {v}"));
            b.require(v.is_zero(), || format!("theta(0) = {v}, expected 0"));
        }
        steps.push(b.finish(
            "4",
            "θ^(10) = e^t θ₁ > 0, hence θ^(i) > 0 on (0,∞) for i = 9, ..., 1 and θ >= 0 with θ(0) = 0".into(),
            "θ rebuilt from the Laplace kernels of the expansion; same induction",
        ));
    }

    // 5. conclusion
    {
        let mut b = StepBuilder::new();
        let expansion = bounds.pf_expansion_identity_check();
        let remark2 = bounds.remark2_identity_check();
        for r in [&expansion, &remark2] {
            b.values.push(format!("{} identity: {}", r.name, if r.holds { "exact equality" } else { "differs" }));
            b.require(r.holds, || {
                let first = r
                    .differences
                    .first()
                    .map(|d| format!(" at (x+{})^-{}: {} vs {}", d.shift, d.order, d.left, d.right))
                    .unwrap_or_default();
                format!("{} identity fails{first}", r.name)
            });
        }
        b.values.push(format!(
            "H(x) = 1/{THETA_SCALE} ∫_0^∞ θ(t) e^{{-(x+2)t}} / (e^t - 1) dt"
        ));
        b.values.push("g(x) - g(x+1) = (2/x^2) H(x)".into());
        steps.push(b.finish(
            "5",
            "H is completely monotonic; (-1)^k [g(x) - g(x+1)]^(k) >= 0 for k >= 0, and by induction \
             (-1)^k g^(k)(x) >= lim_m (-1)^k g^(k)(x+m) = 0"
                .into(),
            "nonnegative Laplace integrand; product of completely monotonic 2/x^2 and H; telescoping over x+m",
        ));
    }

    skip_after_failure(&mut steps);
    CertificateReport::from_steps(steps)
}

/// Numeric corroboration entry for one `(stage, t)` pair.
#[derive(Clone, Debug, Serialize)]
pub struct SpotCheckEntry {
    pub stage: String,
    pub t: String,
    pub mid: String,
    pub rad: String,
    /// `positive`, `negative` or `boundary` (exact zero at `t = 0`).
    pub verdict: String,
    pub precision: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpotCheckReport {
    pub entries: Vec<SpotCheckEntry>,
    pub all_positive: bool,
}

/// Evaluates each stage at each grid point, doubling precision up to 4096
/// bits while the sign is undecided.
pub fn grid_positivity_spotcheck(
    chain: &ThetaChain,
    stages: &[StageId],
    grid: &[BigRational],
    prec: u32,
) -> Result<SpotCheckReport, ProofError> {
    let mut entries = Vec::new();
    let mut all_positive = true;
    for &id in stages {
        let f = chain
            .stage(id)
            .ok_or_else(|| ProofError::UnknownStage(id.to_string()))?;
        for t in grid {
            let mut bits = prec;
            let v = loop {
                let v = f.eval(t, bits);
                if v.sign() != Sign::Indeterminate {
                    break v;
                }
                if bits * 2 > 4096 {
                    return Err(ProofError::IndeterminateSign {
                        stage: id.to_string(),
                        t: t.to_string(),
                        prec: bits,
                    });
                }
                bits *= 2;
            };
            let verdict = match v.sign() {
                Sign::Positive => "positive",
                Sign::Zero if t.is_zero() => "boundary",
                _ => {
                    all_positive = false;
                    "negative"
                }
            };
            entries.push(SpotCheckEntry {
                stage: id.to_string(),
                t: t.to_string(),
                mid: crate::ball::format_sci(&v.mid_rational(), 20),
                rad: format!("{:e}", v.rad_f64()),
                verdict: verdict.to_string(),
                precision: bits,
            });
        }
    }
    Ok(SpotCheckReport { entries, all_positive })
}
