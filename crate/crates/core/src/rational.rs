//! Exact rationals: parsing from `n/d` or decimal text, and display.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `n`, `n/d` or a decimal such as `0.125` (read exactly).
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let value = if let Some((n, d)) = body.split_once('/') {
        if !digits(n) || !digits(d) {
            return None;
        }
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Rational::new(n.parse().ok()?, d)
    } else if let Some((int, frac)) = body.split_once('.') {
        if !digits(int) || !digits(frac) {
            return None;
        }
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let whole: BigInt = format!("{int}{frac}").parse().ok()?;
        Rational::new(whole, scale)
    } else {
        if !digits(body) {
            return None;
        }
        Rational::from_integer(body.parse().ok()?)
    };
    Some(if neg { -value } else { value })
}

/// Exact form: `81/100`, or `1` for integers.
pub fn exact(r: &Rational) -> String {
    r.to_string()
}

/// Advisory decimal form, e.g. `0.81` or `1.0`.
pub fn decimal(r: &Rational) -> String {
    format!("{:?}", r.to_f64().unwrap_or(f64::NAN))
}

/// `81/100 (0.81)`
pub fn display(r: &Rational) -> String {
    format!("{} ({})", exact(r), decimal(r))
}

pub fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && r <= &one()
}
