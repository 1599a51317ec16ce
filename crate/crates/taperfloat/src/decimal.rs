//! Exact decimal input parsing.
//!
//! CLI and matrix-file values are decimal strings like `-12.375e-2`.
//! They are parsed into exact rationals so that encoding decides every
//! rounding from the true value, never through a native float.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Parses a decimal literal (`[+-]ddd[.ddd][e[+-]ddd]`) into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid decimal number: {s:?}"));
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let (negative, t) = match t.as_bytes()[0] {
        b'+' => (false, &t[1..]),
        b'-' => (true, &t[1..]),
        _ => (false, t),
    };
    let (body, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| bad())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (int_digits, frac_digits) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(bad());
    }
    if !int_digits.bytes().all(|b| b.is_ascii_digit())
        || !frac_digits.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let mut mantissa = BigInt::zero();
    for b in int_digits.bytes().chain(frac_digits.bytes()) {
        mantissa = mantissa * 10 + (b - b'0');
    }
    if negative {
        mantissa = -mantissa;
    }
    let scale = exp - frac_digits.len() as i64;
    if scale.abs() > 100_000 {
        return Err(Error::Parse(format!(
            "decimal exponent out of supported range: {s:?}"
        )));
    }
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::new(mantissa * ten.pow(scale as u32), BigInt::one())
    } else {
        BigRational::new(mantissa, ten.pow((-scale) as u32))
    };
    Ok(r)
}
