use num_rational::BigRational;
use num_traits::Signed;
use sha2::{Digest, Sha256};

use polycm::ball::Ball;
use polycm::bound::{BoundFunctions, BoundError};
use polycm::constants::{Constants, EMBEDDED_CONSTANTS};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn grid() -> Vec<BigRational> {
    vec![q(1, 20), q(1, 10), q(1, 4), q(1, 2), q(1, 1), q(2, 1), q(5, 1), q(10, 1), q(50, 1)]
}

#[test]
fn fixture_file_checksum() {
    let digest = Sha256::digest(EMBEDDED_CONSTANTS.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hex, "0e2fb884fcfd26f17aada961a47f894a41659c54b28c96f6b165e49cdeeb98a1");
}

#[test]
fn loads_from_path() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/constants.txt");
    assert_eq!(&Constants::from_path(path).unwrap(), Constants::embedded());
    assert!(Constants::from_path("/nonexistent/constants.txt").is_err());
}

#[test]
fn inequality_holds_on_grid() {
    let b = BoundFunctions::embedded();
    for x in grid() {
        let g = b.g_eval(&x, 256).unwrap();
        assert!(g.is_positive(), "g({x}) = {g}");
    }
}

#[test]
fn telescoping_holds_on_grid() {
    let b = BoundFunctions::embedded();
    for x in grid() {
        let r = b.telescoping_identity_check(&x, 192).unwrap();
        assert!(r.holds, "{r:?}");
    }
}

#[test]
fn derivatives_match_central_differences_on_grid() {
    let b = BoundFunctions::embedded();
    let h = q(1, 1 << 20);
    for x in grid() {
        for k in 1..=6 {
            let exact = b.g_derivative(k, &x, 256).unwrap();
            let fd = (&b.g_derivative(k - 1, &(&x + &h), 256).unwrap()
                - &b.g_derivative(k - 1, &(&x - &h), 256).unwrap())
                .mul_rational(&(q(1, 2) / &h));
            let interval = Ball::from_endpoints(&(&x - &h), &(&x + &h), 320);
            let third = b.g_derivative_ball(k + 2, &interval, 256).unwrap();
            let trunc = third.mag_upper().to_rational() * &h * &h / q(6, 1);
            let gap = (&fd - &exact).mid_rational().abs();
            let allowed = fd.rad().to_rational() + exact.rad().to_rational() + trunc;
            assert!(gap <= allowed, "k={k} x={x}");
        }
    }
}

#[test]
fn derivative_signs_alternate_at_two() {
    let b = BoundFunctions::embedded();
    let d3 = b.g_derivative(3, &q(2, 1), 256).unwrap();
    assert!((-d3).is_positive());
}

#[test]
fn escalation_reaches_small_arguments() {
    let b = BoundFunctions::embedded();
    let tiny = q(1, 1 << 20);
    let g = b.g_eval(&tiny, 64).unwrap();
    assert!(g.is_positive());
    assert!(matches!(
        b.g_eval(&q(1, 1 << 21), 64),
        Err(BoundError::BelowMinimum(_))
    ));
}

#[test]
fn mutated_q_breaks_remark2_only() {
    let text = EMBEDDED_CONSTANTS.replace("q = (1382400,", "q = (1382401,");
    let b = BoundFunctions::new(Constants::parse(&text).unwrap()).unwrap();
    assert!(b.pf_expansion_identity_check().holds);
    assert!(!b.remark2_identity_check().holds);
}
