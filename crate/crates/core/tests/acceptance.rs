//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the lines are always printed by
//! `cargo test`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use polycm::ball::{Ball, Dyadic};
use polycm::bound::{BoundFunctions, FunctionKind};
use polycm::cm::{cm_scan, inequality_scan, GridSpec};
use polycm::constants::{increment_token, value_token_spans, Constants, EMBEDDED_CONSTANTS};
use polycm::polygamma::{
    polygamma_quadrature_crosscheck, polygamma_rational, polygamma_recurrence_shift, PrecisionPolicy,
};
use polycm::proof::{
    build_theta_from_kernel, chain_positivity_certificate, verify_derivative_fixtures, verify_initial_values,
    ThetaChain, Verdict,
};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn pow2(e: i64) -> BigRational {
    Dyadic::pow2(e).to_rational()
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

// 1 ---------------------------------------------------------------------

fn identities_hold(bounds: &BoundFunctions) -> (bool, String) {
    let e = bounds.pf_expansion_identity_check();
    let r = bounds.remark2_identity_check();
    let detail = format!(
        "expansion {} ({} diffs), remark2 {} ({} diffs)",
        if e.holds { "equal" } else { "unequal" },
        e.differences.len(),
        if r.holds { "equal" } else { "unequal" },
        r.differences.len()
    );
    (e.holds && r.holds, detail)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let bounds = BoundFunctions::embedded();
    let (ok, detail) = identities_hold(&bounds);
    let t = start.elapsed();
    Outcome::new(ok && within(t, 1), format!("{detail}; {t:.2?} (limit 1s)"))
}

// 2 ---------------------------------------------------------------------

fn replay_holds(bounds: &BoundFunctions) -> (bool, String) {
    let c = bounds.constants();
    if let Err(e) = build_theta_from_kernel(c) {
        return (false, format!("theta build: {e}"));
    }
    let chain = match ThetaChain::build(c) {
        Ok(ch) => ch,
        Err(e) => return (false, format!("chain: {e}")),
    };
    let fixtures = verify_derivative_fixtures(c, &chain);
    let initial = verify_initial_values(c, &chain);
    let cert = chain_positivity_certificate(bounds);
    let passed_steps = cert.steps.iter().filter(|s| s.verdict == Verdict::Pass).count();
    let ok = fixtures.verdict == Verdict::Pass
        && initial.verdict == Verdict::Pass
        && cert.passed()
        && cert.steps.len() == 5;
    let detail = format!(
        "fixtures {}, initial values {}, certificate {}/{} steps",
        fixtures.verdict,
        initial.verdict,
        passed_steps,
        cert.steps.len()
    );
    (ok, detail)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let bounds = BoundFunctions::embedded();
    let (ok, detail) = replay_holds(&bounds);
    let chain = ThetaChain::build(bounds.constants()).expect("chain builds");
    let at = |s: &str| chain.initial(s.parse().unwrap()).unwrap();
    let spot = at("theta_d5") == int(1632960000) && at("theta2_d9") == int(295702274730240);
    let t = start.elapsed();
    Outcome::new(
        ok && spot && within(t, 10),
        format!("{detail}; θ^(5)(0), θ₂^(9)(0) spot values {}; {t:.2?} (limit 10s)", if spot { "match" } else { "differ" }),
    )
}

// 3, 4 ------------------------------------------------------------------

fn scan_criterion(kind: FunctionKind) -> Outcome {
    let start = Instant::now();
    let bounds = BoundFunctions::embedded();
    let report = cm_scan(&bounds, kind, 8, &GridSpec::default(), 256).expect("default grid is valid");
    let s = &report.summary;
    let t = start.elapsed();
    let ok = s.cells == 9 * 25 && s.negative == 0 && s.indeterminate == 0 && s.errors == 0 && within(t, 60);
    Outcome::new(
        ok,
        format!(
            "{} cells, {} positive, {} negative, {} indeterminate, {} errors; {t:.2?} (limit 60s)",
            s.cells, s.positive, s.negative, s.indeterminate, s.errors
        ),
    )
}

// 5 ---------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let bounds = BoundFunctions::embedded();
    let grid = GridSpec::Geometric {
        start: pow2(-10),
        ratio: std::f64::consts::SQRT_2,
        count: 33,
    };
    let r = inequality_scan(&bounds, &grid, 256).expect("grid is valid");
    let max_bits = r.entries.iter().map(|e| e.precision).max().unwrap_or(0);
    let smallest = r.entries.first().map(|e| e.margin.clone()).unwrap_or_default();
    let largest = r.entries.last().map(|e| e.margin.clone()).unwrap_or_default();
    Outcome::new(
        r.passed() && r.entries.len() == 33,
        format!(
            "{} points 2^-10..64, {} strict, {} failures, {} indeterminate; margin {smallest} at 2^-10, {largest} at 64; max {max_bits} bits",
            r.entries.len(),
            r.strict,
            r.failures,
            r.indeterminate
        ),
    )
}

// 6 ---------------------------------------------------------------------

fn rel_diff(a: &Ball, b: &Ball) -> f64 {
    ((a - b).to_f64() / b.to_f64()).abs()
}

fn criterion_6() -> Outcome {
    let policy = PrecisionPolicy::new(128);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut failures = Vec::new();
    for m in 1..=3u32 {
        for x in [q(1, 2), int(1), int(2), int(10)] {
            let series = polygamma_rational(m, &x, policy).expect("series");
            let shifted = polygamma_recurrence_shift(m, &x, 5, policy).expect("recurrence");
            let quad = polygamma_quadrature_crosscheck(m, &x, 128).expect("quadrature");
            let d1 = rel_diff(&shifted, &series);
            let d2 = rel_diff(&quad.estimate, &series);
            worst = worst.max(d1).max(d2);
            if d1 >= 1e-20 || d2 >= 1e-20 || !shifted.overlaps(&series) {
                ok = false;
                failures.push(format!("m={m} x={x}"));
            }
        }
    }
    let w = 200;
    let pi = Ball::pi(w);
    let zeta2 = &pi.square() / &Ball::from_int(6, w);
    let psi1 = polygamma_rational(1, &int(1), policy).unwrap();
    // ζ(3) = 1.2020569031595942853997381615114499907649862923404988817922...
    let zeta3_lo = BigRational::new(
        "12020569031595942853997381615114499907649862923404988817922".parse::<BigInt>().unwrap(),
        BigInt::from(10).pow(58),
    );
    let ulp = BigRational::new(BigInt::one(), BigInt::from(10).pow(58));
    let two = int(2);
    let minus_2z3 = Ball::from_endpoints(&(-&two * (&zeta3_lo + &ulp)), &(-&two * &zeta3_lo), w);
    let psi2 = polygamma_rational(2, &int(1), policy).unwrap();
    let encl = psi1.overlaps(&zeta2) && psi2.overlaps(&minus_2z3);
    Outcome::new(
        ok && encl,
        format!(
            "worst relative disagreement {worst:.2e} (limit 1e-20){}; ψ'(1) ∋ π²/6, ψ''(1) ∋ -2ζ(3): {}",
            if failures.is_empty() { String::new() } else { format!(", failing {failures:?}") },
            encl
        ),
    )
}

// 7 ---------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let bounds = BoundFunctions::embedded();
    let mut ok = true;
    let mut parts = Vec::new();
    for x in [q(1, 4), int(1), int(10)] {
        let r = bounds.telescoping_identity_check(&x, 192).expect("telescoping");
        ok &= r.holds;
        parts.push(format!("x={}: gap {:.1e} <= {:.1e}", r.x, r.gap, r.tolerance));
    }
    Outcome::new(ok, parts.join(", "))
}

// 8 ---------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let bounds = BoundFunctions::embedded();
    let policy = PrecisionPolicy::new(256);
    let h = pow2(-20);
    let cells: Vec<(u32, BigRational)> = (1..=4u32)
        .flat_map(|k| [int(1), int(3)].into_iter().map(move |x| (k, x)))
        .collect();
    let results: Vec<(bool, String)> = cells
        .par_iter()
        .map(|(k, x)| {
            let k = *k;
            let exact = bounds.g_derivative(k, x, policy).unwrap();
            let plus = bounds.g_derivative(k - 1, &(x + &h), policy).unwrap();
            let minus = bounds.g_derivative(k - 1, &(x - &h), policy).unwrap();
            let fd = (&plus - &minus).mul_rational(&(int(1) / (int(2) * &h)));
            // central-difference error is h^2/6 · g^{(k+2)}(ξ), ξ ∈ [x-h, x+h]
            let interval = Ball::from_endpoints(&(x - &h), &(x + &h), 320);
            let third = bounds.g_derivative_ball(k + 2, &interval, policy).unwrap();
            let trunc = third.mag_upper().to_rational() * &h * &h / int(6);
            let gap = (&fd - &exact).mid_rational().abs();
            let allowed = fd.rad().to_rational() + exact.rad().to_rational() + &trunc;
            let ok = gap <= allowed;
            let to_f = |r: &BigRational| Ball::from_rational(r, 64).to_f64();
            (ok, format!("k={k} x={x}: {:.1e}<={:.1e}", to_f(&gap), to_f(&allowed)))
        })
        .collect();
    let ok = results.iter().all(|r| r.0);
    Outcome::new(ok, results.into_iter().map(|r| r.1).collect::<Vec<_>>().join(", "))
}

// 9 ---------------------------------------------------------------------

fn mutant_detected(text: &str) -> bool {
    let Ok(constants) = Constants::parse(text) else {
        return true;
    };
    let Ok(bounds) = BoundFunctions::new(constants) else {
        return true;
    };
    !identities_hold(&bounds).0 || !replay_holds(&bounds).0
}

fn criterion_9() -> Outcome {
    let spans = value_token_spans(EMBEDDED_CONSTANTS);
    let escaped: Vec<String> = spans
        .par_iter()
        .filter_map(|(line, span)| {
            let mutant = increment_token(EMBEDDED_CONSTANTS, span.clone());
            (!mutant_detected(&mutant)).then(|| format!("line {line} `{}`", &EMBEDDED_CONSTANTS[span.clone()]))
        })
        .collect();
    Outcome::new(
        escaped.is_empty() && !spans.is_empty(),
        format!(
            "{} single-token +1 mutants, {} undetected{}",
            spans.len(),
            escaped.len(),
            if escaped.is_empty() { String::new() } else { format!(": {escaped:?}") }
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "exact expansion and remainder identities", criterion_1),
        (2, "exact proof replay", criterion_2),
        (3, "cm-scan g, k<=8, 25-point grid, 256 bits", || scan_criterion(FunctionKind::G)),
        (4, "cm-scan H, k<=8, 25-point grid, 256 bits", || scan_criterion(FunctionKind::H)),
        (5, "inequality on 2^-10..64", criterion_5),
        (6, "polygamma series vs recurrence vs quadrature", criterion_6),
        (7, "telescoping identity at 192 bits", criterion_7),
        (8, "derivatives vs central differences", criterion_8),
        (9, "fixture mutation detection", criterion_9),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "acceptance criterion {n} [{status}] {name}: {} [{:.2?}]",
            outcome.detail,
            start.elapsed()
        );
        if !outcome.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion/criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
