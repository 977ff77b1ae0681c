//! Grid scans of `(-1)^k f^{(k)}(x)` with three-valued sign verdicts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ball::{format_sci, Ball, Dyadic, Sign};
use crate::bound::{BoundFunctions, FunctionKind};
use crate::polygamma::PrecisionPolicy;

/// Significant bits kept when snapping generated grid points to rationals.
pub const GRID_POINT_BITS: u32 = 20;
/// Default highest derivative order of a scan.
pub const DEFAULT_K_MAX: u32 = 8;
/// Default value the decay check requires the last point to fall below.
pub const DEFAULT_DECAY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid is empty")]
    Empty,
    #[error("grid point {0} is not positive")]
    NonPositive(String),
    #[error("invalid geometric grid: {0}")]
    Geometric(String),
}

/// Either an explicit list of points or `start · ratio^i`, `i < count`.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Points(Vec<BigRational>),
    Geometric { start: BigRational, ratio: f64, count: usize },
}

impl Default for GridSpec {
    /// 25 points from 1/16 to 64.
    fn default() -> Self {
        GridSpec::Geometric {
            start: BigRational::new(1.into(), 16.into()),
            ratio: 2f64.powf(10.0 / 24.0),
            count: 25,
        }
    }
}

impl GridSpec {
    /// The grid points in increasing order without duplicates. Generated
    /// points are rounded to nearest with 20 significant bits, so they are
    /// exact dyadic rationals; `start` itself is kept exactly.
    pub fn points(&self) -> Result<Vec<BigRational>, GridError> {
        let mut pts = match self {
            GridSpec::Points(p) => p.clone(),
            GridSpec::Geometric { start, ratio, count } => {
                if !(ratio.is_finite() && *ratio > 0.0) {
                    return Err(GridError::Geometric(format!("ratio {ratio}")));
                }
                let s = num_traits::ToPrimitive::to_f64(start).unwrap_or(f64::NAN);
                (0..*count)
                    .map(|i| {
                        if i == 0 {
                            return Ok(start.clone());
                        }
                        let v = s * ratio.powi(i as i32);
                        let e = v.log2().floor() as i32 + 1 - GRID_POINT_BITS as i32;
                        let snapped = (v / 2f64.powi(e)).round() * 2f64.powi(e);
                        let d = Dyadic::from_f64(snapped)
                            .ok_or_else(|| GridError::Geometric(format!("point {v} is not finite")))?;
                        Ok(d.to_rational())
                    })
                    .collect::<Result<_, _>>()?
            }
        };
        if let Some(bad) = pts.iter().find(|p| !p.is_positive()) {
            return Err(GridError::NonPositive(bad.to_string()));
        }
        if pts.is_empty() {
            return Err(GridError::Empty);
        }
        pts.sort();
        pts.dedup();
        Ok(pts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignVerdict {
    Positive,
    Negative,
    Indeterminate,
    /// Evaluation failed (domain or precision error).
    Error,
}

impl std::fmt::Display for SignVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SignVerdict::Positive => "positive",
            SignVerdict::Negative => "negative",
            SignVerdict::Indeterminate => "indeterminate",
            SignVerdict::Error => "error",
        })
    }
}

/// One `(k, x)` cell: the enclosure of `(-1)^k f^{(k)}(x)`.
#[derive(Clone, Debug, Serialize)]
pub struct ScanEntry {
    pub k: u32,
    pub x: String,
    pub mid: String,
    pub rad: String,
    pub verdict: SignVerdict,
    pub precision: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub x_value: BigRational,
    #[serde(skip)]
    pub enclosure: Option<Ball>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ScanSummary {
    pub cells: usize,
    pub positive: usize,
    pub negative: usize,
    pub indeterminate: usize,
    pub errors: usize,
    /// Largest `k` such that every cell with order `<= k` is positive.
    pub max_k_verified: Option<u32>,
    pub failed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CmScanReport {
    pub function: FunctionKind,
    pub k_max: u32,
    pub target_bits: u32,
    pub entries: Vec<ScanEntry>,
    pub summary: ScanSummary,
}

impl CmScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// `k,x,mid,rad,verdict` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,x,mid,rad,verdict\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{},{}\n", e.k, e.x, e.mid, e.rad, e.verdict));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "cm-scan {} k<={} at {} bits\n",
            self.function, self.k_max, self.target_bits
        );
        for e in &self.entries {
            out.push_str(&format!(
                "k={:<2} x={:<24} {:<13} {} ± {} [{} bits]\n",
                e.k, e.x, e.verdict, e.mid, e.rad, e.precision
            ));
        }
        let s = &self.summary;
        out.push_str(&format!(
            "{} cells: {} positive, {} negative, {} indeterminate, {} errors; {}\n",
            s.cells,
            s.positive,
            s.negative,
            s.indeterminate,
            s.errors,
            if s.failed { "FAILED" } else { "ok" }
        ));
        out
    }
}

fn summarize(entries: &[ScanEntry], k_max: u32) -> ScanSummary {
    let count = |v| entries.iter().filter(|e| e.verdict == v).count();
    let mut max_k_verified = None;
    for k in 0..=k_max {
        if entries
            .iter()
            .filter(|e| e.k == k)
            .all(|e| e.verdict == SignVerdict::Positive)
        {
            max_k_verified = Some(k);
        } else {
            break;
        }
    }
    let negative = count(SignVerdict::Negative);
    ScanSummary {
        cells: entries.len(),
        positive: count(SignVerdict::Positive),
        negative,
        indeterminate: count(SignVerdict::Indeterminate),
        errors: count(SignVerdict::Error),
        max_k_verified,
        failed: negative > 0,
    }
}

/// Precisions tried for each cell: target, 2×, 4×, none above the cap.
pub fn precision_ladder(target: u32, cap: u32) -> Vec<u32> {
    let mut out = vec![target];
    for f in [2, 4] {
        let p = target * f;
        if p <= cap {
            out.push(p);
        }
    }
    out
}

fn scan_cell(
    bounds: &BoundFunctions,
    kind: FunctionKind,
    k: u32,
    x: &BigRational,
    policy: PrecisionPolicy,
) -> ScanEntry {
    let mut last: Option<(Ball, u32)> = None;
    let mut error = None;
    for bits in precision_ladder(policy.target_bits, bounds.precision_cap()) {
        let p = PrecisionPolicy {
            target_bits: bits,
            ..policy
        };
        match bounds.derivative(kind, k, x, p) {
            Ok(v) => {
                let signed = if k % 2 == 1 { -v } else { v };
                let decided = signed.sign() != Sign::Indeterminate;
                last = Some((signed, bits));
                if decided {
                    break;
                }
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let (verdict, mid, rad, precision, enclosure) = match &last {
        Some((b, bits)) => {
            let verdict = match b.sign() {
                Sign::Positive => SignVerdict::Positive,
                Sign::Negative | Sign::Zero => SignVerdict::Negative,
                Sign::Indeterminate => SignVerdict::Indeterminate,
            };
            (verdict, format_sci(&b.mid_rational(), 20), format!("{:.3e}", b.rad_f64()), *bits, Some(b.clone()))
        }
        None => (SignVerdict::Error, String::new(), String::new(), policy.target_bits, None),
    };
    ScanEntry {
        k,
        x: x.to_string(),
        mid,
        rad,
        verdict,
        precision,
        error,
        x_value: x.clone(),
        enclosure,
    }
}

/// Signs of `(-1)^k f^{(k)}(x)` for `k <= k_max` over the grid, cells
/// evaluated in parallel and sorted by `(k, x)`.
pub fn cm_scan(
    bounds: &BoundFunctions,
    kind: FunctionKind,
    k_max: u32,
    grid: &GridSpec,
    policy: impl Into<PrecisionPolicy>,
) -> Result<CmScanReport, GridError> {
    let policy = policy.into();
    let points = grid.points()?;
    let cells: Vec<(u32, BigRational)> = (0..=k_max)
        .flat_map(|k| points.iter().map(move |x| (k, x.clone())))
        .collect();
    let mut entries: Vec<ScanEntry> = cells
        .par_iter()
        .map(|(k, x)| scan_cell(bounds, kind, *k, x, policy))
        .collect();
    entries.sort_by(|a, b| (a.k, &a.x_value).cmp(&(b.k, &b.x_value)));
    let summary = summarize(&entries, k_max);
    Ok(CmScanReport {
        function: kind,
        k_max,
        target_bits: policy.target_bits,
        entries,
        summary,
    })
}

/// `ψ'(x)^2 + ψ''(x) > B(x)` at each grid point, with the margin.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityEntry {
    pub x: String,
    pub lhs: String,
    pub bound: String,
    pub margin: String,
    pub margin_rad: String,
    pub verdict: SignVerdict,
    pub precision: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub entries: Vec<InequalityEntry>,
    pub strict: usize,
    pub failures: usize,
    pub indeterminate: usize,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.indeterminate == 0
    }
}

/// Same cells as `cm_scan(g, 0, ·)`, reported as the inequality.
pub fn inequality_scan(
    bounds: &BoundFunctions,
    grid: &GridSpec,
    policy: impl Into<PrecisionPolicy>,
) -> Result<InequalityReport, GridError> {
    let policy = policy.into();
    let scan = cm_scan(bounds, FunctionKind::G, 0, grid, policy)?;
    let entries: Vec<InequalityEntry> = scan
        .entries
        .into_iter()
        .map(|e| {
            let bound = bounds
                .bound_exact(&e.x_value)
                .map(|b| format_sci(&b, 20))
                .unwrap_or_default();
            let lhs = match (&e.enclosure, bounds.bound_exact(&e.x_value)) {
                (Some(m), Ok(b)) => m.add_ball(&Ball::from_rational(&b, m.prec())).to_sci_string(20),
                _ => String::new(),
            };
            InequalityEntry {
                x: e.x,
                lhs,
                bound,
                margin: e.mid,
                margin_rad: e.rad,
                verdict: e.verdict,
                precision: e.precision,
                error: e.error,
            }
        })
        .collect();
    let count = |v| entries.iter().filter(|e| e.verdict == v).count();
    Ok(InequalityReport {
        strict: count(SignVerdict::Positive),
        failures: count(SignVerdict::Negative) + count(SignVerdict::Error),
        indeterminate: count(SignVerdict::Indeterminate),
        entries,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayEntry {
    pub j: u32,
    pub x: String,
    pub mid: String,
    pub rad: String,
    /// Upper end of this value is below the lower end of the previous one.
    pub decreasing: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub function: FunctionKind,
    pub entries: Vec<DecayEntry>,
    pub decreasing: bool,
    pub threshold: f64,
    pub below_threshold: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Values at `x = 2^j`, `j = 0..=j_max` (at most 16), must be strictly
/// decreasing with the last one below `threshold`.
pub fn decay_check(
    bounds: &BoundFunctions,
    kind: FunctionKind,
    j_max: u32,
    threshold: f64,
    policy: impl Into<PrecisionPolicy>,
) -> DecayReport {
    let policy = policy.into();
    let mut report = DecayReport {
        function: kind,
        entries: Vec::new(),
        decreasing: true,
        threshold,
        below_threshold: false,
        passed: false,
        error: None,
    };
    if j_max > 16 {
        report.error = Some(format!("j_max {j_max} exceeds 16"));
        report.decreasing = false;
        return report;
    }
    let mut prev: Option<Ball> = None;
    for j in 0..=j_max {
        let x = BigRational::from_integer(BigInt::one() << j);
        let v = match kind {
            FunctionKind::G => bounds.g_eval(&x, policy),
            FunctionKind::H => bounds.h_eval(&x, policy),
        };
        let v = match v {
            Ok(v) => v,
            Err(e) => {
                report.error = Some(e.to_string());
                report.decreasing = false;
                return report;
            }
        };
        let decreasing = prev.as_ref().map(|p| v.upper() < p.lower());
        if decreasing == Some(false) {
            report.decreasing = false;
        }
        report.entries.push(DecayEntry {
            j,
            x: x.to_string(),
            mid: format_sci(&v.mid_rational(), 20),
            rad: format!("{:.3e}", v.rad_f64()),
            decreasing,
        });
        prev = Some(v);
    }
    let last = prev.expect("at least one point");
    report.below_threshold = match Dyadic::from_f64(threshold) {
        Some(t) => last.upper() < t,
        None => false,
    };
    report.passed = report.decreasing && report.below_threshold;
    report
}
