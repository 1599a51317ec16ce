//! Encode/decode for `(N, s)` posits.
//!
//! The exponent is carried by a Golomb-Rice code: a unary regime (quotient)
//! terminated by an opposite bit, then `s` binary remainder bits, then the
//! fraction in whatever space is left. Regime growth near the extremes eats
//! remainder and fraction bits, which is what tapers the precision.
//!
//! Encoding picks the representable value nearest in real value, not nearest
//! in pattern space; the two differ where the remainder field is truncated.
//! Ties break toward the even bit pattern. Magnitudes below `f_min`
//! round to `f_min`, never to zero; magnitudes at or above `f_max` stay at
//! `f_max`, never infinity.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::decoded::Decoded;
use crate::dyadic::DyadicValue;
use crate::error::{Error, Result};

/// An `(N, s)` posit format: `N` word bits, exponent scale `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PositConfig {
    n: u32,
    s: u32,
}

impl PositConfig {
    /// Word sizes up to 16 bits keep exhaustive enumeration cheap; the
    /// encoding itself is defined for any `N >= 3`, `0 <= s <= N-3`.
    pub const MAX_WORD_BITS: u32 = 16;

    pub fn new(n: u32, s: u32) -> Result<Self> {
        if !(3..=Self::MAX_WORD_BITS).contains(&n) {
            return Err(Error::Config(format!(
                "posit word size must be in 3..={}, got {n}",
                Self::MAX_WORD_BITS
            )));
        }
        if s > n - 3 {
            return Err(Error::Config(format!(
                "posit exponent scale must satisfy s <= N-3 ({}), got {s}",
                n - 3
            )));
        }
        Ok(PositConfig { n, s })
    }

    pub fn word_bits(&self) -> u32 {
        self.n
    }

    pub fn exponent_scale(&self) -> u32 {
        self.s
    }

    fn pattern_mask(&self) -> u16 {
        (((1u32 << self.n) - 1) & 0xffff) as u16
    }

    /// Largest finite exponent: `(N-2) * 2^s`.
    pub fn max_exponent(&self) -> i32 {
        ((self.n - 2) << self.s) as i32
    }

    pub fn min_exponent(&self) -> i32 {
        -self.max_exponent()
    }

    pub fn f_max(&self) -> DyadicValue {
        DyadicValue::pow2(self.max_exponent() as i64)
    }

    pub fn f_min(&self) -> DyadicValue {
        DyadicValue::pow2(self.min_exponent() as i64)
    }

    /// `N - 3 - s`, the fraction width where precision peaks.
    pub fn max_fraction_bits(&self) -> u32 {
        self.n - 3 - self.s
    }

    pub fn zero_pattern(&self) -> u16 {
        0
    }

    pub fn infinity_pattern(&self) -> u16 {
        1 << (self.n - 1)
    }

    /// Pattern of `+f_max` (all ones below the sign bit).
    pub fn f_max_pattern(&self) -> u16 {
        (1 << (self.n - 1)) - 1
    }

    /// Pattern of `+f_min`.
    pub fn f_min_pattern(&self) -> u16 {
        1
    }

    /// `20 log10(f_max / f_min)`, rounded to one decimal place.
    pub fn dynamic_range_db(&self) -> f64 {
        let db = 40.0 * self.max_exponent() as f64 * std::f64::consts::LOG10_2;
        (db * 10.0).round() / 10.0
    }

    /// Two's-complement negation within the word.
    pub fn negate_pattern(&self, bits: u16) -> u16 {
        bits.wrapping_neg() & self.pattern_mask()
    }
}

/// Fraction width available to a value with exponent `e`.
///
/// Exponents in the truncation zone near `±f_max` may themselves be
/// unencodable (their remainder bits do not fit); the width reported there
/// is zero.
pub fn fraction_bits_at(e: i32, cfg: &PositConfig) -> Result<u32> {
    if e.abs() > cfg.max_exponent() {
        return Err(Error::ExponentOutOfRange { exponent: e as i64 });
    }
    let m = (cfg.n - 1) as i32;
    let q = e.div_euclid(1 << cfg.s);
    let regime_len = if q >= 0 { q + 2 } else { 1 - q }.min(m);
    Ok((m - regime_len - cfg.s as i32).max(0) as u32)
}

/// Decodes any `N`-bit pattern; total over all `2^N` inputs.
pub fn decode(bits: u16, cfg: &PositConfig) -> Decoded {
    let bits = bits & cfg.pattern_mask();
    if bits == cfg.zero_pattern() {
        return Decoded::Zero;
    }
    if bits == cfg.infinity_pattern() {
        return Decoded::Infinity { negative: false };
    }
    let negative = bits >> (cfg.n - 1) & 1 == 1;
    let mag = if negative { cfg.negate_pattern(bits) } else { bits };

    let m = cfg.n - 1; // payload bits below the sign
    let body = (mag as u32) & ((1 << m) - 1);
    let first = body >> (m - 1) & 1;
    let mut run = 0;
    while run < m && body >> (m - 1 - run) & 1 == first {
        run += 1;
    }
    let q = if first == 1 {
        run as i32 - 1
    } else {
        -(run as i32)
    };
    // Terminator (when present) is consumed; truncated remainder/fraction
    // bits read as zero.
    let consumed = (run + 1).min(m);
    let after = m - consumed;
    let r_taken = cfg.s.min(after);
    let r_field = if r_taken == 0 {
        0
    } else {
        body >> (after - r_taken) & ((1 << r_taken) - 1)
    };
    let remainder = r_field << (cfg.s - r_taken);
    let width = after - r_taken;
    let fraction = (body & ((1u32 << width) - 1)) as u64;

    Decoded::Normal {
        negative,
        exponent: q * (1 << cfg.s) + remainder as i32,
        fraction,
        fraction_width: width,
    }
}

/// All `2^N` patterns with their decoded values, in pattern order.
pub fn enumerate(cfg: &PositConfig) -> Vec<(u16, Decoded)> {
    (0..1u32 << cfg.n)
        .map(|p| (p as u16, decode(p as u16, cfg)))
        .collect()
}

fn positive_value(pattern: u16, cfg: &PositConfig) -> DyadicValue {
    decode(pattern, cfg)
        .to_dyadic()
        .expect("finite positive pattern")
}

/// Shared bracket-and-round search over the positive pattern range.
///
/// `cmp_value(v)` orders the input magnitude against a representable value;
/// `cmp_midpoint(a, b)` orders it against `(a + b) / 2`. Both are exact.
fn encode_magnitude(
    cfg: &PositConfig,
    cmp_value: impl Fn(&DyadicValue) -> Ordering,
    cmp_midpoint: impl Fn(&DyadicValue, &DyadicValue) -> Ordering,
) -> u16 {
    if cmp_value(&cfg.f_max()) != Ordering::Less {
        return cfg.f_max_pattern();
    }
    if cmp_value(&cfg.f_min()) != Ordering::Greater {
        return cfg.f_min_pattern();
    }
    // Positive finite patterns decode to strictly increasing values, so the
    // bracketing pair can be found by binary search on the pattern integers.
    let mut lo = cfg.f_min_pattern() as u32;
    let mut hi = cfg.f_max_pattern() as u32;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        match cmp_value(&positive_value(mid as u16, cfg)) {
            Ordering::Less => hi = mid - 1,
            _ => lo = mid,
        }
    }
    let lo = lo as u16;
    let v_lo = positive_value(lo, cfg);
    if cmp_value(&v_lo) == Ordering::Equal {
        return lo;
    }
    let v_hi = positive_value(lo + 1, cfg);
    match cmp_midpoint(&v_lo, &v_hi) {
        Ordering::Less => lo,
        Ordering::Greater => lo + 1,
        // Exact tie: take the even bit pattern of the two adjacent ones.
        Ordering::Equal => {
            if lo.is_multiple_of(2) {
                lo
            } else {
                lo + 1
            }
        }
    }
}

/// Round-to-nearest encoding of an exact dyadic value.
pub fn encode(x: &DyadicValue, cfg: &PositConfig) -> u16 {
    if x.is_zero() {
        return cfg.zero_pattern();
    }
    let mag = x.abs();
    let pattern = encode_magnitude(
        cfg,
        |v| mag.cmp(v),
        |a, b| mag.times_pow2(1).cmp(&(a + b)),
    );
    if x.is_negative() {
        cfg.negate_pattern(pattern)
    } else {
        pattern
    }
}

/// Round-to-nearest encoding of an exact rational (decimal CLI inputs).
pub fn encode_rational(x: &BigRational, cfg: &PositConfig) -> u16 {
    use num_traits::Zero;
    if x.is_zero() {
        return cfg.zero_pattern();
    }
    let mag = x.abs();
    let twice = &mag * BigInt::from(2);
    let pattern = encode_magnitude(
        cfg,
        |v| mag.cmp(&BigRational::from(v)),
        |a, b| twice.cmp(&BigRational::from(&(a + b))),
    );
    if x.is_negative() {
        cfg.negate_pattern(pattern)
    } else {
        pattern
    }
}

/// Precomputed fast path for encoding `f64` inputs.
///
/// Every representable value and every midpoint between neighbors is itself
/// exactly an `f64` (small odd significands, moderate exponents), so one
/// binary search over precomputed boundaries reproduces the exact rounding.
#[derive(Debug, Clone)]
pub struct EncodeTable {
    cfg: PositConfig,
    boundaries: Vec<f64>,
}

impl EncodeTable {
    pub fn new(cfg: PositConfig) -> Result<Self> {
        let exact_f64 = |v: &DyadicValue| -> Result<f64> {
            let bits = v.significand().magnitude().bits();
            let top = v.floor_log2();
            if bits > 53 || !(-1020..=1020).contains(&top) {
                return Err(Error::Config(format!(
                    "posit({}, {}) values exceed exact f64 range",
                    cfg.n, cfg.s
                )));
            }
            Ok(v.to_f64())
        };
        let count = cfg.f_max_pattern() as usize;
        let mut boundaries = Vec::with_capacity(count - 1);
        let mut prev = positive_value(1, &cfg);
        for p in 2..=count as u16 {
            let v = positive_value(p, &cfg);
            boundaries.push(exact_f64(&(&prev + &v).times_pow2(-1))?);
            prev = v;
        }
        Ok(EncodeTable { cfg, boundaries })
    }

    pub fn config(&self) -> &PositConfig {
        &self.cfg
    }

    /// Bit-identical to `encode(DyadicValue::from_f64(x))`.
    pub fn encode_f64(&self, x: f64) -> Result<u16> {
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        if x == 0.0 {
            return Ok(self.cfg.zero_pattern());
        }
        let mag = x.abs();
        let idx = self.boundaries.partition_point(|&b| b < mag);
        let pattern = if idx == self.boundaries.len() {
            self.cfg.f_max_pattern()
        } else if self.boundaries[idx] == mag {
            // Dead-center between patterns idx+1 and idx+2: take the even one.
            let p = idx as u16 + 1;
            if p.is_multiple_of(2) {
                p
            } else {
                p + 1
            }
        } else {
            idx as u16 + 1
        };
        Ok(if x < 0.0 {
            self.cfg.negate_pattern(pattern)
        } else {
            pattern
        })
    }
}
