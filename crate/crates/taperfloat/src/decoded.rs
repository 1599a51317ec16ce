//! The unpacked form shared by the linear (posit) and log codecs.

use crate::dyadic::DyadicValue;
use num_bigint::BigInt;

/// A decoded word: either a special value or an unpacked normal number.
///
/// For a linear format the normal value is
/// `sign * 2^exponent * (1 + fraction / 2^fraction_width)`;
/// for a log format the same fields are read in the log domain as
/// `sign * 2^(exponent + fraction / 2^fraction_width)`.
/// The leading 1 is always implicit: neither family has denormals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    Zero,
    /// Posits have a single unsigned infinity; IEEE-style log keeps the sign.
    Infinity { negative: bool },
    Normal {
        negative: bool,
        exponent: i32,
        fraction: u64,
        fraction_width: u32,
    },
}

impl Decoded {
    pub fn is_zero(&self) -> bool {
        matches!(self, Decoded::Zero)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Decoded::Infinity { .. })
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, Decoded::Normal { .. })
    }

    /// Exact linear-domain value of a zero or normal word.
    ///
    /// Returns `None` for infinity.
    pub fn to_dyadic(&self) -> Option<DyadicValue> {
        match *self {
            Decoded::Zero => Some(DyadicValue::zero()),
            Decoded::Infinity { .. } => None,
            Decoded::Normal {
                negative,
                exponent,
                fraction,
                fraction_width,
            } => {
                let mut sig = BigInt::from((1u64 << fraction_width) | fraction);
                if negative {
                    sig = -sig;
                }
                Some(DyadicValue::new(
                    sig,
                    exponent as i64 - fraction_width as i64,
                ))
            }
        }
    }

    /// The log-domain value `exponent + fraction/2^width` as a fixed-point
    /// integer in units of `2^-width`, extended to `width` fraction bits.
    ///
    /// Monotone in the represented value, so it doubles as a sort key.
    pub fn log_key(&self, width: u32) -> Option<i64> {
        match *self {
            Decoded::Normal {
                exponent,
                fraction,
                fraction_width,
                ..
            } => {
                debug_assert!(fraction_width <= width);
                Some(
                    (exponent as i64) * (1i64 << width)
                        + ((fraction as i64) << (width - fraction_width)),
                )
            }
            _ => None,
        }
    }

    /// Sign and magnitude significand with its scale: value is
    /// `sign * significand * 2^scale_exp` (linear semantics).
    pub fn to_parts(&self) -> Option<(bool, u64, i64)> {
        match *self {
            Decoded::Normal {
                negative,
                exponent,
                fraction,
                fraction_width,
            } => Some((
                negative,
                (1u64 << fraction_width) | fraction,
                exponent as i64 - fraction_width as i64,
            )),
            _ => None,
        }
    }
}
