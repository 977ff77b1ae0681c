use num_rational::BigRational;

use polycm::bound::{BoundFunctions, FunctionKind};
use polycm::cm::{cm_scan, decay_check, inequality_scan, GridSpec, SignVerdict, DEFAULT_DECAY_THRESHOLD};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn small_grid() -> GridSpec {
    GridSpec::Geometric {
        start: q(1, 10),
        ratio: 2.0,
        count: 12,
    }
}

#[test]
fn g_and_h_positive_to_order_six() {
    let b = BoundFunctions::embedded();
    for kind in [FunctionKind::G, FunctionKind::H] {
        let r = cm_scan(&b, kind, 6, &small_grid(), 128).unwrap();
        assert_eq!(r.summary.cells, 7 * 12);
        assert_eq!(r.summary.positive, r.summary.cells, "{}", r.to_text());
        assert_eq!(r.summary.max_k_verified, Some(6));
        assert!(!r.summary.failed);
    }
}

#[test]
fn inequality_agrees_with_order_zero_scan() {
    let b = BoundFunctions::embedded();
    let grid = GridSpec::Points(vec![q(1, 16), q(1, 1), q(64, 1)]);
    let scan = cm_scan(&b, FunctionKind::G, 0, &grid, 256).unwrap();
    let ineq = inequality_scan(&b, &grid, 256).unwrap();
    assert!(ineq.passed());
    let a: Vec<_> = scan.entries.iter().map(|e| e.verdict).collect();
    let c: Vec<_> = ineq.entries.iter().map(|e| e.verdict).collect();
    assert_eq!(a, c);
    assert!(ineq.entries[2].margin.starts_with("2.424880264533533"));
}

#[test]
fn verdicts_are_stable_under_more_precision() {
    let b = BoundFunctions::embedded();
    let grid = GridSpec::Points(vec![q(1, 4), q(3, 1)]);
    let lo = cm_scan(&b, FunctionKind::G, 3, &grid, 64).unwrap();
    let hi = cm_scan(&b, FunctionKind::G, 3, &grid, 128).unwrap();
    for (a, c) in lo.entries.iter().zip(&hi.entries) {
        if a.verdict == SignVerdict::Positive {
            assert_eq!(c.verdict, SignVerdict::Positive);
        }
    }
}

#[test]
fn json_and_csv_layouts() {
    let b = BoundFunctions::embedded();
    let r = cm_scan(&b, FunctionKind::H, 1, &GridSpec::Points(vec![q(1, 1), q(2, 1)]), 96).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["function"], "H");
    assert_eq!(v["entries"].as_array().unwrap().len(), 4);
    assert_eq!(v["entries"][0]["verdict"], "positive");
    let csv = r.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,x,mid,rad,verdict");
    assert_eq!(lines.len(), 5);
    assert!(lines[3].starts_with("1,1,"));
}

#[test]
fn g_decays_below_threshold() {
    let b = BoundFunctions::embedded();
    let r = decay_check(&b, FunctionKind::G, 10, DEFAULT_DECAY_THRESHOLD, 128);
    assert!(r.passed, "{r:?}");
    assert_eq!(r.entries.len(), 11);
    let h = decay_check(&b, FunctionKind::H, 10, DEFAULT_DECAY_THRESHOLD, 128);
    assert!(h.decreasing);
    let bad = decay_check(&b, FunctionKind::G, 17, DEFAULT_DECAY_THRESHOLD, 128);
    assert!(!bad.passed && bad.error.is_some());
}
