//! Ground-truth reference operations.
//!
//! Everything here is exact or models a textbook definition directly, so
//! the accumulation engines can be checked bit for bit: [`exact_dot`]
//! evaluates the inner product at infinite precision,
//! [`round_nearest_even`] performs the single final rounding,
//! [`sequential_rounded_dot`] models an FMA chain that rounds after every
//! step, and [`nearest_by_enumeration`] re-derives rounding by brute-force
//! distance minimization over the whole value set.

use num_rational::BigRational;

use crate::dyadic::DyadicValue;
use crate::error::{Error, Result};
use crate::format::FormatConfig;
use crate::lns;
use crate::posit::{self, PositConfig};

pub use crate::dyadic::exact_dot;

/// Rounds an exact value to the nearest representable one.
///
/// Linear formats measure distance on the real line; log formats measure it
/// in the log domain (their values are irrational, and hardware conversion
/// into them is a log-domain rounding). Ties go to the even bit pattern.
/// Sub-`f_min` magnitudes round to `f_min`, never zero; magnitudes at or
/// beyond `f_max` stay at `f_max`, never infinity.
pub fn round_nearest_even(x: &DyadicValue, format: &FormatConfig) -> Result<u16> {
    match format {
        FormatConfig::Posit(p) => Ok(posit::encode(x, p)),
        FormatConfig::Log(l) => lns::encode_rational(&BigRational::from(x), l),
    }
}

/// Models an FMA chain: `r(a_n b_n + r(a_{n-1} b_{n-1} + r(...)))`,
/// re-rounding the running sum to the format after every step.
///
/// Defined for linear formats; a log format has no native addition to chain.
pub fn sequential_rounded_dot(a: &[u16], b: &[u16], format: &FormatConfig) -> Result<u16> {
    let FormatConfig::Posit(cfg) = format else {
        return Err(Error::Config(
            "sequential rounding models linear formats only".into(),
        ));
    };
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut acc_bits = cfg.zero_pattern();
    for (&x, &y) in a.iter().zip(b) {
        let vx = posit::decode(x, cfg)
            .to_dyadic()
            .ok_or(Error::InvalidOperation("infinite operand"))?;
        let vy = posit::decode(y, cfg)
            .to_dyadic()
            .ok_or(Error::InvalidOperation("infinite operand"))?;
        let acc = posit::decode(acc_bits, cfg).to_dyadic().unwrap();
        acc_bits = posit::encode(&(&acc + &(&vx * &vy)), cfg);
    }
    Ok(acc_bits)
}

/// Brute-force rounding reference: scans every finite value of the format
/// and returns the pattern minimizing exact distance to `x`, ties to the
/// even pattern. Independent of the binary-search encoder it checks.
pub fn nearest_by_enumeration(x: &DyadicValue, cfg: &PositConfig) -> u16 {
    if x.is_zero() {
        return cfg.zero_pattern();
    }
    let mut best: Option<(DyadicValue, u16)> = None;
    for (pattern, d) in posit::enumerate(cfg) {
        let Some(v) = d.to_dyadic() else { continue };
        if v.is_zero() {
            continue; // nonzero never rounds to zero
        }
        let dist = (&v - x).abs();
        best = match best {
            None => Some((dist, pattern)),
            Some((bd, bp)) => match dist.cmp(&bd) {
                std::cmp::Ordering::Less => Some((dist, pattern)),
                std::cmp::Ordering::Equal => {
                    // Tie: prefer the even pattern.
                    if pattern % 2 == 0 {
                        Some((dist, pattern))
                    } else {
                        Some((bd, bp))
                    }
                }
                std::cmp::Ordering::Greater => Some((bd, bp)),
            },
        };
    }
    best.unwrap().1
}
