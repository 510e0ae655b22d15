//! Text form of exact rationals: `"a/b"` or a plain integer `"a"`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};
use crate::Rational;

pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Input(format!("not a finite rational: {text:?}"));
    match t.split_once('/') {
        Some((num, den)) => {
            let num = i128::from_str(num.trim()).map_err(|_| bad())?;
            let den = i128::from_str(den.trim()).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(Ratio::new(num, den))
        }
        None => {
            if let Ok(v) = i128::from_str(t) {
                return Ok(Ratio::from_integer(v));
            }
            // Decimal literals such as "0.25" are accepted; they are exact in base 10.
            let v = f64::from_str(t).map_err(|_| bad())?;
            rational_from_f64(v).and_then(|_| decimal_literal(t).ok_or_else(bad))
        }
    }
}

fn decimal_literal(t: &str) -> Option<Rational> {
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1i128, rest),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.')?;
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 30 {
        return None;
    }
    let den = 10i128.checked_pow(frac.len() as u32)?;
    let digits = format!("{int}{frac}");
    let num = if digits.is_empty() { 0 } else { i128::from_str(&digits).ok()? };
    Some(Ratio::new(sign * num, den))
}

/// Exact conversion of a finite float; NaN and infinities are rejected.
pub fn rational_from_f64(v: f64) -> Result<Rational> {
    if !v.is_finite() {
        return Err(Error::Input(format!("non-finite payoff {v}")));
    }
    let out_of_range = || Error::Input(format!("payoff {v} out of range"));
    let big = Ratio::<BigInt>::from_float(v).ok_or_else(out_of_range)?;
    Ok(Ratio::new(
        big.numer().to_i128().ok_or_else(out_of_range)?,
        big.denom().to_i128().ok_or_else(out_of_range)?,
    ))
}

pub fn format_rational<T: Clone + Integer + std::fmt::Display>(r: &Ratio<T>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub mod as_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

pub mod vec_as_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}
