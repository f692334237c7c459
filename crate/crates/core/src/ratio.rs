//! Exact bandwidth arithmetic.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};

/// Bandwidth in units of the (uniform) edge capacity domain. Exact.
pub type Bandwidth = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as an exact rational (expected `p/q`, an integer or a decimal)")]
pub struct ParseRatioError(pub String);

/// Parses `7/20`, `3`, `0.35` or `-1.5` into an exact rational.
pub fn parse_ratio(text: &str) -> Result<Bandwidth, ParseRatioError> {
    let err = || ParseRatioError(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = t.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| err())?;
        let den: i64 = den.trim().parse().map_err(|_| err())?;
        if den == 0 {
            return Err(err());
        }
        return Ok(Ratio::new(num, den));
    }
    let (negative, digits) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    if frac_part.len() > 15 {
        return Err(err());
    }
    let int: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| err())? };
    let scale = 10i64.pow(frac_part.len() as u32);
    let frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| err())? };
    let num = int.checked_mul(scale).and_then(|v| v.checked_add(frac)).ok_or_else(err)?;
    let value = Ratio::new(num, scale);
    Ok(if negative { -value } else { value })
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn format_ratio(value: &Bandwidth) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &Bandwidth) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

/// Display adapter printing both the exact value and a decimal approximation.
pub struct Exact<'a>(pub &'a Bandwidth);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{} (~{:.6})", format_ratio(self.0), to_f64(self.0))
        }
    }
}

pub(crate) fn positive_part(value: Bandwidth) -> Bandwidth {
    if value > Bandwidth::zero() {
        value
    } else {
        Bandwidth::zero()
    }
}

/// Serde adapter storing a rational as its `p/q` string.
pub mod serde_ratio {
    use super::{format_ratio, parse_ratio, Bandwidth};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Bandwidth, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Bandwidth, D::Error> {
        let text = String::deserialize(d)?;
        parse_ratio(&text).map_err(D::Error::custom)
    }
}
