use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Scientific notation with `digits` significant digits (round half up).
pub fn format_sci(q: &BigRational, digits: usize) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let neg = q.is_negative();
    let a = q.abs();
    let log2 = a.numer().bits() as f64 - a.denom().bits() as f64;
    let mut e10 = (log2 * std::f64::consts::LOG10_2).floor() as i64;
    let lo = BigInt::from(10u32).pow(digits as u32 - 1);
    let hi = &lo * 10u32;
    let mant = loop {
        let m = scaled_round(&a, digits as i64 - 1 - e10);
        if m >= hi {
            e10 += 1;
        } else if m < lo {
            e10 -= 1;
        } else {
            break m;
        }
    };
    let s = mant.to_string();
    let (head, tail) = s.split_at(1);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(head);
    if !tail.is_empty() {
        out.push('.');
        out.push_str(tail);
    }
    if e10 != 0 {
        out.push_str(&format!("e{e10}"));
    }
    out
}

/// `round(a * 10^k)` for `a > 0`.
fn scaled_round(a: &BigRational, k: i64) -> BigInt {
    let ten = BigInt::from(10u32);
    let (n, d) = if k >= 0 {
        (a.numer() * ten.pow(k as u32), a.denom().clone())
    } else {
        (a.numer().clone(), a.denom() * ten.pow((-k) as u32))
    };
    let (q, r) = n.div_rem(&d);
    if r * 2u32 >= d {
        q + 1u32
    } else {
        q
    }
}

/// `num/den` followed by a decimal approximation.
pub fn format_rational(q: &BigRational, digits: usize) -> String {
    if q.is_integer() {
        format!("{}", q.numer())
    } else {
        format!("{}/{} ≈ {}", q.numer(), q.denom(), format_sci(q, digits))
    }
}
