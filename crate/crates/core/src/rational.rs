//! Exact rational numbers and their textual `"p/q"` form.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};
use serde_with::{DeserializeAs, SerializeAs};

use crate::error::{Error, Result};

pub type Q = num_rational::BigRational;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `2^(-e)` for `e >= 0`.
pub fn pow2_inv(e: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << e as usize)
}

/// Integer power with negative exponents allowed (base must be nonzero then).
pub fn powi(base: &Q, exp: i64) -> Q {
    let mut acc = Q::one();
    let b = if exp < 0 { base.recip() } else { base.clone() };
    for _ in 0..exp.unsigned_abs() {
        acc *= &b;
    }
    acc
}

/// Canonical `p/q` text, always with an explicit denominator.
pub fn to_pq(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q`, a bare integer `p`, or a finite decimal such as `0.25`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part = BigInt::from_str(if int.is_empty() || int == "-" { "0" } else { int })
            .map_err(|_| bad())?;
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Q::new(int_part.abs() * &scale + frac_part, scale);
        return Ok(if neg { -mag } else { mag });
    }
    BigInt::from_str(s).map(Q::from_integer).map_err(|_| bad())
}

/// Fixed-point decimal rendering with exactly `digits` fractional digits,
/// rounding half away from zero.
pub fn to_fixed(x: &Q, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = x.abs() * Q::from_integer(scale.clone());
    let floor = scaled.floor().to_integer();
    let rem = scaled - Q::from_integer(floor.clone());
    let rounded = if rem >= q(1, 2) { floor + 1 } else { floor };
    let (int, frac) = rounded.div_rem(&scale);
    let neg = x.is_negative() && !(int.is_zero() && frac.is_zero());
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `serde_with` adapter writing rationals as `"p/q"` strings.
pub struct Pq;

impl SerializeAs<Q> for Pq {
    fn serialize_as<S: Serializer>(source: &Q, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&to_pq(source))
    }
}

impl<'de> DeserializeAs<'de, Q> for Pq {
    fn deserialize_as<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}
