//! Loader for the labelled fixture constants (`data/constants.txt`).
//!
//! Every transcribed number used by the bound, the identity checks and the
//! proof replay comes from this one file; see the file header for the
//! grammar.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{ExpPoly, PartialFractionForm, PartialFractionTerm, RationalPoly};

/// The fixture file shipped with the crate.
pub const EMBEDDED_CONSTANTS: &str = include_str!("../data/constants.txt");

/// Exponential-polynomial fixtures that must be present.
pub const EXPPOLY_FIXTURES: [&str; 6] = [
    "theta",
    "theta_d1",
    "theta_d10",
    "theta1_d1",
    "theta1_d10",
    "theta2_d9",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstantsError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate label `{label}`")]
    Duplicate { line: usize, label: String },
    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("missing label `{0}`")]
    Missing(String),
    #[error("`{label}`: {message}")]
    Invalid { label: String, message: String },
}

/// A parsed right-hand side: a scalar, or a polynomial with the scalars
/// folded into every coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixtureValue {
    Scalar(BigRational),
    Poly(RationalPoly),
}

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: FixtureValue,
}

/// Fixture data for the bound `B(x) = p(x) / (scale_p x^4 (x+1)^10)`, the
/// remainder `Q(x) / (scale_q x^2 (1+x)^10 (2+x)^10)`, the partial-fraction
/// expansion of `H(x) - ψ'(x)`, and the θ-chain displays and initial values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constants {
    pub p: RationalPoly,
    pub q: RationalPoly,
    pub scale_p: BigRational,
    pub scale_q: BigRational,
    pub expansion: PartialFractionForm,
    pub exppoly: BTreeMap<String, ExpPoly>,
    pub initial: BTreeMap<String, BigRational>,
}

/// Labels of the initial-value table, in display order.
pub fn initial_value_labels() -> Vec<String> {
    let mut out = Vec::with_capacity(29);
    out.extend((1..=10).map(|i| format!("theta_d{i}")));
    out.extend((1..=10).map(|i| format!("theta1_d{i}")));
    out.extend((1..=9).map(|i| format!("theta2_d{i}")));
    out
}

impl Constants {
    /// The embedded fixture file, parsed once.
    pub fn embedded() -> &'static Constants {
        static CELL: OnceLock<Constants> = OnceLock::new();
        CELL.get_or_init(|| Constants::parse(EMBEDDED_CONSTANTS).expect("embedded constants are valid"))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Constants, ConstantsError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConstantsError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Constants::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Constants, ConstantsError> {
        let mut entries = parse_entries(text)?;

        let p = take_poly(&mut entries, "p")?;
        let q = take_poly(&mut entries, "q")?;
        let scale_p = take_scalar(&mut entries, "scale.p")?;
        let scale_q = take_scalar(&mut entries, "scale.q")?;
        check_degree("p", &p, 10)?;
        check_degree("q", &q, 21)?;
        for (label, s) in [("scale.p", &scale_p), ("scale.q", &scale_q)] {
            if s.is_zero() {
                return Err(ConstantsError::Invalid {
                    label: label.into(),
                    message: "scale must be nonzero".into(),
                });
            }
        }

        let mut terms = Vec::new();
        let mut exppoly_blocks: BTreeMap<String, Vec<(u32, RationalPoly)>> = BTreeMap::new();
        let mut initial = BTreeMap::new();
        for (label, entry) in std::mem::take(&mut entries) {
            let parts: Vec<&str> = label.split('.').collect();
            match parts.as_slice() {
                ["expansion", a, m] => {
                    let shift = parse_index(&label, a, entry.line)?;
                    let order = parse_index(&label, m, entry.line)?;
                    let coeff = scalar_of(&label, entry.value)?;
                    let term = PartialFractionTerm::new(coeff, shift, order).map_err(|e| {
                        ConstantsError::Invalid {
                            label: label.clone(),
                            message: e.to_string(),
                        }
                    })?;
                    terms.push(term);
                }
                ["exppoly", name, ek] if EXPPOLY_FIXTURES.contains(name) => {
                    let k = ek.strip_prefix('e').ok_or_else(|| ConstantsError::UnknownLabel {
                        line: entry.line,
                        label: label.clone(),
                    })?;
                    let k = parse_index(&label, k, entry.line)?;
                    let poly = match entry.value {
                        FixtureValue::Poly(p) => p,
                        FixtureValue::Scalar(s) => RationalPoly::constant(s),
                    };
                    exppoly_blocks.entry(name.to_string()).or_default().push((k, poly));
                }
                ["initial", name] if initial_value_labels().iter().any(|l| l == name) => {
                    initial.insert(name.to_string(), scalar_of(&label, entry.value)?);
                }
                _ => {
                    return Err(ConstantsError::UnknownLabel {
                        line: entry.line,
                        label,
                    })
                }
            }
        }

        if terms.is_empty() {
            return Err(ConstantsError::Missing("expansion.<a>.<m>".into()));
        }
        let expansion = PartialFractionForm::new(RationalPoly::zero(), terms).map_err(|e| {
            ConstantsError::Invalid {
                label: "expansion".into(),
                message: e.to_string(),
            }
        })?;

        let mut exppoly = BTreeMap::new();
        for name in EXPPOLY_FIXTURES {
            let blocks = exppoly_blocks
                .remove(name)
                .ok_or_else(|| ConstantsError::Missing(format!("exppoly.{name}.e<k>")))?;
            exppoly.insert(name.to_string(), ExpPoly::from_blocks(blocks));
        }
        for label in initial_value_labels() {
            if !initial.contains_key(&label) {
                return Err(ConstantsError::Missing(format!("initial.{label}")));
            }
        }

        Ok(Constants {
            p,
            q,
            scale_p,
            scale_q,
            expansion,
            exppoly,
            initial,
        })
    }

    pub fn exppoly_fixture(&self, name: &str) -> Option<&ExpPoly> {
        self.exppoly.get(name)
    }

    pub fn initial_value(&self, name: &str) -> Option<&BigRational> {
        self.initial.get(name)
    }
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, Entry>, ConstantsError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (label, rhs) = content.split_once('=').ok_or_else(|| ConstantsError::Parse {
            line,
            message: "expected `label = value`".into(),
        })?;
        let label = label.trim();
        if label.is_empty()
            || !label
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '.' || c == '_')
        {
            return Err(ConstantsError::Parse {
                line,
                message: format!("invalid label `{label}`"),
            });
        }
        let value = parse_product(rhs, line)?;
        if out.contains_key(label) {
            return Err(ConstantsError::Duplicate {
                line,
                label: label.to_string(),
            });
        }
        out.insert(label.to_string(), Entry { line, value });
    }
    Ok(out)
}

fn parse_product(rhs: &str, line: usize) -> Result<FixtureValue, ConstantsError> {
    let err = |message: String| ConstantsError::Parse { line, message };
    let mut scalar = BigRational::from_integer(BigInt::from(1));
    let mut list: Option<Vec<BigRational>> = None;
    for factor in rhs.split('*') {
        let factor = factor.trim();
        if let Some(inner) = factor.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| err(format!("unclosed list `{factor}`")))?;
            if list.is_some() {
                return Err(err("at most one list per product".into()));
            }
            let coeffs = inner
                .split(',')
                .map(|s| parse_rational(s.trim()).map_err(|m| err(m)))
                .collect::<Result<Vec<_>, _>>()?;
            list = Some(coeffs);
        } else {
            scalar *= parse_rational(factor).map_err(|m| err(m))?;
        }
    }
    Ok(match list {
        Some(coeffs) => FixtureValue::Poly(RationalPoly::new(coeffs).scale(&scalar)),
        None => FixtureValue::Scalar(scalar),
    })
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let bad = || format!("invalid rational `{s}`");
    let digits = |d: &str| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit());
    let body = s.strip_prefix('-').unwrap_or(s);
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    if !digits(num) || den.is_some_and(|d| !digits(d)) {
        return Err(bad());
    }
    let mut n = BigInt::from_str(num).map_err(|_| bad())?;
    if s.starts_with('-') {
        n = -n;
    }
    let d = match den {
        Some(d) => BigInt::from_str(d).map_err(|_| bad())?,
        None => BigInt::from(1),
    };
    if d.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(BigRational::new(n, d))
}

fn parse_index(label: &str, s: &str, line: usize) -> Result<u32, ConstantsError> {
    s.parse().map_err(|_| ConstantsError::Parse {
        line,
        message: format!("bad index `{s}` in `{label}`"),
    })
}

fn take(entries: &mut BTreeMap<String, Entry>, label: &str) -> Result<Entry, ConstantsError> {
    entries
        .remove(label)
        .ok_or_else(|| ConstantsError::Missing(label.into()))
}

fn take_poly(entries: &mut BTreeMap<String, Entry>, label: &str) -> Result<RationalPoly, ConstantsError> {
    match take(entries, label)?.value {
        FixtureValue::Poly(p) => Ok(p),
        FixtureValue::Scalar(_) => Err(ConstantsError::Invalid {
            label: label.into(),
            message: "expected a coefficient list".into(),
        }),
    }
}

fn take_scalar(entries: &mut BTreeMap<String, Entry>, label: &str) -> Result<BigRational, ConstantsError> {
    scalar_of(label, take(entries, label)?.value)
}

fn scalar_of(label: &str, value: FixtureValue) -> Result<BigRational, ConstantsError> {
    match value {
        FixtureValue::Scalar(s) => Ok(s),
        FixtureValue::Poly(_) => Err(ConstantsError::Invalid {
            label: label.into(),
            message: "expected a scalar".into(),
        }),
    }
}

fn check_degree(label: &str, p: &RationalPoly, expected: usize) -> Result<(), ConstantsError> {
    if p.degree() != Some(expected) {
        return Err(ConstantsError::Invalid {
            label: label.into(),
            message: format!("expected degree {expected}, found {:?}", p.degree()),
        });
    }
    Ok(())
}

/// Byte ranges of every numeric token on the right-hand side of an entry,
/// with its 1-based line number. Used to generate single-token mutants of
/// a fixture file.
pub fn value_token_spans(text: &str) -> Vec<(usize, Range<usize>)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (idx, raw) in text.split_inclusive('\n').enumerate() {
        let content_end = raw.find('#').unwrap_or(raw.len());
        if let Some(eq) = raw[..content_end].find('=') {
            let bytes = raw.as_bytes();
            let mut i = eq + 1;
            while i < content_end {
                let c = bytes[i];
                if c == b'-' || c.is_ascii_digit() {
                    let start = i;
                    i += 1;
                    while i < content_end && (bytes[i].is_ascii_digit() || bytes[i] == b'/') {
                        i += 1;
                    }
                    out.push((idx + 1, offset + start..offset + i));
                } else {
                    i += 1;
                }
            }
        }
        offset += raw.len();
    }
    out
}

/// `text` with the token at `span` replaced by its value plus one.
pub fn increment_token(text: &str, span: Range<usize>) -> String {
    let token = &text[span.clone()];
    let value = parse_rational(token).expect("span covers a rational token") + BigRational::from_integer(1.into());
    let replacement = if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    };
    format!("{}{}{}", &text[..span.start], replacement, &text[span.end..])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn embedded_file_loads() {
        let c = Constants::embedded();
        assert_eq!(c.p.coeff(0), q(450, 1));
        assert_eq!(c.p.coeff(10), q(75, 1));
        assert_eq!(c.q.coeff(0), q(1382400, 1));
        assert_eq!(c.scale_p, q(900, 1));
        assert_eq!(c.scale_q, q(1800, 1));
        assert_eq!(c.expansion.terms().len(), 22);
        assert_eq!(c.expansion.coeff(1, 2), q(251, 120));
        assert_eq!(c.initial.len(), 29);
        assert_eq!(c.initial["theta_d5"], q(1632960000, 1));
    }

    #[test]
    fn products_scale_lists() {
        let c = Constants::embedded();
        let t = &c.exppoly["theta"];
        assert_eq!(t.coeff(3), RationalPoly::from_ints([-326592000i64, 163296000]));
        assert_eq!(t.coeff(0).coeff(0), q(-4 * 832809600, 1));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = EMBEDDED_CONSTANTS.replace("scale.p = 900", "scale.p = 900   # trailing\n\n");
        assert_eq!(&Constants::parse(&text).unwrap(), Constants::embedded());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = format!("{EMBEDDED_CONSTANTS}\nscale.p = 1\n");
        assert!(matches!(
            Constants::parse(&text),
            Err(ConstantsError::Duplicate { label, .. }) if label == "scale.p"
        ));
        let bad = EMBEDDED_CONSTANTS.replace("scale.q = 1800", "scale.q = 18x0");
        let line = EMBEDDED_CONSTANTS
            .lines()
            .position(|l| l.starts_with("scale.q"))
            .unwrap()
            + 1;
        assert_eq!(
            Constants::parse(&bad).unwrap_err(),
            ConstantsError::Parse {
                line,
                message: "invalid rational `18x0`".into()
            }
        );
    }

    #[test]
    fn missing_and_unknown_labels() {
        let text = EMBEDDED_CONSTANTS.replace("initial.theta2_d9", "initial.theta2_d99");
        assert!(matches!(
            Constants::parse(&text),
            Err(ConstantsError::UnknownLabel { .. })
        ));
        let text: String = EMBEDDED_CONSTANTS
            .lines()
            .filter(|l| !l.starts_with("initial.theta1_d4"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(
            Constants::parse(&text).unwrap_err(),
            ConstantsError::Missing("initial.theta1_d4".into())
        );
    }

    #[test]
    fn rejects_two_lists_and_zero_denominators() {
        assert!(parse_product("(1, 2) * (3)", 1).is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("--1").is_err());
        assert_eq!(parse_rational("-3/6").unwrap(), q(-1, 2));
    }

    #[test]
    fn token_increment() {
        let text = "a = -1/2 * (3, 0)  # 7\n";
        let spans = value_token_spans(text);
        assert_eq!(spans.len(), 3);
        assert_eq!(increment_token(text, spans[0].1.clone()), "a = 1/2 * (3, 0)  # 7\n");
        assert_eq!(increment_token(text, spans[2].1.clone()), "a = -1/2 * (3, 1)  # 7\n");
    }
}
