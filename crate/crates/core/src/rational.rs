//! Exact rationals and the small helpers every other module leans on.
//!
//! `ExactRational` is `num_rational::BigRational`: numerator and denominator
//! are kept coprime with a positive denominator, and zero is `0/1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type ExactRational = BigRational;

pub fn int(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> ExactRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_big(n: BigInt) -> ExactRational {
    BigRational::from_integer(n)
}

/// `"p/q"` or `"p"` form; the denominator is omitted when it is 1.
pub fn to_string(q: &ExactRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(from_big(s.parse().map_err(|_| bad())?)),
    }
}

/// Exact integer square root, if `n` is a perfect square.
pub fn sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Exact rational square root, if `q` is the square of a rational.
pub fn sqrt_rational(q: &ExactRational) -> Option<ExactRational> {
    let n = sqrt_exact(q.numer())?;
    let d = sqrt_exact(q.denom())?;
    Some(BigRational::new(n, d))
}

/// Naive height `max(|num|, den)`.
pub fn height(q: &ExactRational) -> BigInt {
    let n = q.numer().abs();
    if n > *q.denom() {
        n
    } else {
        q.denom().clone()
    }
}

/// Bit length of `max(|num|, den)`; a cheap logarithmic height.
pub fn height_bits(q: &ExactRational) -> u64 {
    q.numer().bits().max(q.denom().bits())
}

/// Decimal approximation with `digits` digits after the point, truncated
/// toward zero.
pub fn to_decimal(q: &ExactRational, digits: usize) -> String {
    let neg = q.is_negative();
    let q = q.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (q.numer() * &scale) / q.denom();
    let mut s = scaled.to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        s.insert(s.len() - digits, '.');
    }
    if neg && scaled != BigInt::zero() {
        s.insert(0, '-');
    }
    s
}

/// Lossy conversion for plotting and gap statistics only.
pub fn to_f64(q: &ExactRational) -> f64 {
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let (n, d) = (n >> shift, d >> shift);
    let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
    if df == 0.0 {
        if nf.is_sign_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        nf / df
    }
}

pub(crate) fn serialize<S: Serializer>(q: &ExactRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&to_string(q))
}

pub(crate) fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ExactRational, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).map_err(serde::de::Error::custom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse("-6/10").unwrap(), frac(-3, 5));
        assert_eq!(to_string(&frac(4, 25)), "4/25");
        assert_eq!(to_string(&int(-9)), "-9");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn canonical_zero() {
        let z = frac(0, -7);
        assert_eq!(z.numer(), &BigInt::zero());
        assert_eq!(z.denom(), &BigInt::one());
    }

    #[test]
    fn decimals() {
        assert_eq!(to_decimal(&frac(1, 3), 4), "0.3333");
        assert_eq!(to_decimal(&frac(-7, 2), 2), "-3.50");
        assert_eq!(to_decimal(&int(4), 0), "4");
        assert_eq!(to_decimal(&frac(-1, 1000), 2), "0.00");
    }

    #[test]
    fn square_roots() {
        assert_eq!(sqrt_rational(&frac(48, 27)), Some(frac(4, 3)));
        assert_eq!(sqrt_rational(&frac(2, 1)), None);
        assert_eq!(sqrt_rational(&frac(-4, 1)), None);
    }
}
