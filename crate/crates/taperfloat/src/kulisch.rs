//! Wide fixed-point accumulation: every product is shifted to a common
//! scale and summed exactly, with a single rounding when the register is
//! converted back to a word format.
//!
//! The register range is restricted to roughly `[f_min^2, f_max]`: the LSB
//! weight is `2 * e_min` (the smallest product survives) and the MSB weight
//! is `e_max`. Product bits that fall below the LSB are truncated toward
//! zero on the magnitude before the signed add, which keeps accumulation
//! order-independent; a sticky flag records that it happened. Sums that
//! leave the register range saturate to the nearest extreme and set a
//! sticky overflow flag.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::dyadic::DyadicValue;
use crate::error::{Error, Result};
use crate::format::FormatConfig;
use crate::lns::PqTables;
use crate::posit;

/// Register geometry: bit weights of the two ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KulischConfig {
    msb_weight: i32,
    lsb_weight: i32,
}

impl KulischConfig {
    pub fn new(msb_weight: i32, lsb_weight: i32) -> Self {
        assert!(msb_weight > lsb_weight);
        KulischConfig {
            msb_weight,
            lsb_weight,
        }
    }

    /// Geometry for a word format: MSB at `e_max`, LSB at `2 * e_min`.
    pub fn for_format(format: &FormatConfig) -> Self {
        Self::new(format.max_exponent(), 2 * format.min_exponent())
    }

    pub fn msb_weight(&self) -> i32 {
        self.msb_weight
    }

    pub fn lsb_weight(&self) -> i32 {
        self.lsb_weight
    }

    /// Register width: one unit bit per weight step, plus a carry/unit bit
    /// at the MSB and a sign bit.
    pub fn width(&self) -> u32 {
        (self.msb_weight - self.lsb_weight) as u32 + 2
    }

    fn storage_limbs(&self) -> usize {
        (self.width() as usize + 2).div_ceil(64)
    }
}

/// Exponent bias applied to a product before accumulation (`m + bias_m`).
pub fn bias_input(m: i64, bias_m: i32) -> i64 {
    m + bias_m as i64
}

/// A two's-complement fixed-point accumulator of `width()` bits with unit
/// `2^lsb_weight`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KulischAccumulator {
    cfg: KulischConfig,
    /// Little-endian two's complement with at least two spare high bits, so
    /// a full-range addend plus a full register never wraps in storage.
    limbs: Vec<u64>,
    overflow: bool,
    truncated: bool,
}

impl KulischAccumulator {
    pub fn new(cfg: KulischConfig) -> Self {
        KulischAccumulator {
            limbs: vec![0; cfg.storage_limbs()],
            cfg,
            overflow: false,
            truncated: false,
        }
    }

    pub fn config(&self) -> &KulischConfig {
        &self.cfg
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    /// Sticky: a sum left the register range and was saturated.
    pub fn overflow_flag(&self) -> bool {
        self.overflow
    }

    /// Sticky: some product had magnitude bits below the LSB truncated.
    pub fn truncation_flag(&self) -> bool {
        self.truncated
    }

    pub fn reset(&mut self) {
        self.limbs.fill(0);
        self.overflow = false;
        self.truncated = false;
    }

    fn is_negative(&self) -> bool {
        self.limbs.last().unwrap() >> 63 == 1
    }

    /// Register extremes, as limb images of `2^(width-1) - 1` and `-2^(width-1)`.
    fn extreme(&self, negative: bool) -> Vec<u64> {
        let bits = self.cfg.width() as usize - 1;
        let n = self.cfg.storage_limbs();
        let mut limbs = vec![0u64; n];
        for (i, limb) in limbs.iter_mut().enumerate() {
            let lo = i * 64;
            if lo + 64 <= bits {
                *limb = u64::MAX;
            } else if lo < bits {
                *limb = (1u64 << (bits - lo)) - 1;
            }
        }
        if negative {
            // -(2^(width-1)) = !(2^(width-1) - 1) + 1 - ... simply negate max+1.
            let mut v = limbs;
            negate_limbs(&mut v);
            sub_at(&mut v, 1, 0);
            return v;
        }
        limbs
    }

    /// In range means every bit from `width-1` up is a copy of the sign bit,
    /// i.e. the storage value sign-extends from `width` bits.
    fn out_of_range(&self) -> bool {
        let sign_ext = if self.is_negative() { u64::MAX } else { 0 };
        let start = (self.cfg.width() - 1) as usize;
        for (i, &limb) in self.limbs.iter().enumerate() {
            let lo = i * 64;
            if lo + 64 <= start {
                continue;
            }
            let mask = if start <= lo {
                u64::MAX
            } else {
                u64::MAX << (start - lo)
            };
            if (limb ^ sign_ext) & mask != 0 {
                return true;
            }
        }
        false
    }

    fn saturate(&mut self, negative: bool) {
        self.limbs = self.extreme(negative);
        self.overflow = true;
    }

    /// Adds `sign * significand * 2^scale_exp`.
    ///
    /// Magnitude bits below the LSB weight are truncated (toward zero) before
    /// the signed add; a true sum beyond the register range saturates.
    /// After saturation the register stays pinned at the extreme.
    pub fn accumulate(&mut self, negative: bool, significand: u64, scale_exp: i64) {
        if significand == 0 {
            return;
        }
        let mut sig = significand;
        let mut shift = scale_exp - self.cfg.lsb_weight as i64;
        if shift < 0 {
            let drop = -shift;
            if drop >= 64 || sig >> drop == 0 {
                self.truncated = true;
                return;
            }
            if sig & ((1u64 << drop) - 1) != 0 {
                self.truncated = true;
            }
            sig >>= drop;
            shift = 0;
        }
        if self.overflow {
            return;
        }
        let top_bit = shift + (63 - sig.leading_zeros() as i64);
        if top_bit >= self.cfg.width() as i64 {
            // The addend alone dwarfs the register range; the sum's sign is
            // the addend's sign.
            self.saturate(negative);
            return;
        }
        let limb = (shift / 64) as usize;
        let val = (sig as u128) << (shift % 64);
        if negative {
            sub_at(&mut self.limbs, val, limb);
        } else {
            add_at(&mut self.limbs, val, limb);
        }
        if self.out_of_range() {
            let neg = self.is_negative();
            self.saturate(neg);
        }
    }

    /// Exact register addition; flags OR together. A saturated input pins
    /// the result at its extreme.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.cfg != other.cfg {
            return Err(Error::Config(
                "merging accumulators with different geometry".into(),
            ));
        }
        let mut out = self.clone();
        out.truncated |= other.truncated;
        if self.overflow {
            out.overflow = true;
            return Ok(out);
        }
        if other.overflow {
            out.limbs = other.limbs.clone();
            out.overflow = true;
            return Ok(out);
        }
        let mut carry = 0u64;
        for (a, b) in out.limbs.iter_mut().zip(&other.limbs) {
            let (s1, c1) = a.overflowing_add(*b);
            let (s2, c2) = s1.overflowing_add(carry);
            *a = s2;
            carry = (c1 | c2) as u64;
        }
        if out.out_of_range() {
            let neg = out.is_negative();
            out.saturate(neg);
        }
        Ok(out)
    }

    /// `register <- rne(register / d)` in register units.
    pub fn divide_by_uint(&mut self, d: u64) -> Result<()> {
        if d == 0 {
            return Err(Error::DivideByZero);
        }
        if self.overflow {
            return Err(Error::Saturated {
                negative: self.is_negative(),
            });
        }
        if d == 1 {
            return Ok(());
        }
        let negative = self.is_negative();
        if negative {
            negate_limbs(&mut self.limbs);
        }
        let mut rem = 0u64;
        for limb in self.limbs.iter_mut().rev() {
            let cur = ((rem as u128) << 64) | *limb as u128;
            *limb = (cur / d as u128) as u64;
            rem = (cur % d as u128) as u64;
        }
        let double = (rem as u128) * 2;
        if double > d as u128 || (double == d as u128 && self.limbs[0] & 1 == 1) {
            add_at(&mut self.limbs, 1, 0);
        }
        if negative {
            negate_limbs(&mut self.limbs);
        }
        Ok(())
    }

    /// Raw register contents in units of `2^lsb_weight`.
    pub fn register_value(&self) -> BigInt {
        let negative = self.is_negative();
        let mut mag = self.limbs.clone();
        if negative {
            negate_limbs(&mut mag);
        }
        let bytes: Vec<u8> = mag.iter().flat_map(|l| l.to_le_bytes()).collect();
        let big = BigUint::from_bytes_le(&bytes);
        if negative {
            -BigInt::from(big)
        } else {
            BigInt::from(big)
        }
    }

    /// Exact held value.
    pub fn value(&self) -> Result<DyadicValue> {
        if self.overflow {
            return Err(Error::Saturated {
                negative: self.is_negative(),
            });
        }
        Ok(DyadicValue::new(
            self.register_value(),
            self.cfg.lsb_weight as i64,
        ))
    }

    /// Converts the register to a word, scaling by `2^bias_n` first.
    ///
    /// Linear formats round to nearest; log formats normalize the register
    /// and go through the `q` table (tables must be supplied).
    pub fn to_encoded(
        &self,
        format: &FormatConfig,
        tables: Option<&PqTables>,
        bias_n: i32,
    ) -> Result<u16> {
        let value = self.value()?; // surfaces saturation
        if value.is_zero() {
            return Ok(format.zero_pattern());
        }
        match format {
            FormatConfig::Posit(p) => Ok(posit::encode(&value.times_pow2(bias_n as i64), p)),
            FormatConfig::Log(l) => {
                let tables = tables.ok_or(Error::InvalidOperation(
                    "log conversion requires p/q tables",
                ))?;
                let negative = value.is_negative();
                let mag = value.significand().magnitude();
                let frac_bits = mag.bits() as u32 - 1;
                let e = value.floor_log2() + bias_n as i64;
                // Top fraction bits (below the leading 1) plus a sticky OR of
                // the rest; 63 bits always exceed beta.
                let take = frac_bits.min(63);
                let top: u64 = ((mag >> (frac_bits - take)) & BigUint::from(u64::MAX))
                    .try_into()
                    .unwrap();
                let frac = top & !(1u64 << take);
                let sticky = if frac_bits > take {
                    (mag & ((BigUint::from(1u8) << (frac_bits - take)) - 1u8)) != BigUint::zero()
                } else {
                    false
                };
                Ok(crate::lns::linear_to_log(
                    negative, e, frac, take, sticky, tables, l,
                ))
            }
        }
    }
}

/// Adds a (up to) 128-bit value into the limbs starting at `limb_idx`.
fn add_at(limbs: &mut [u64], value: u128, limb_idx: usize) {
    let mut carry = 0u64;
    let parts = [value as u64, (value >> 64) as u64];
    for (i, limb) in limbs.iter_mut().enumerate().skip(limb_idx) {
        let k = i - limb_idx;
        if k >= parts.len() && carry == 0 {
            break;
        }
        let add = parts.get(k).copied().unwrap_or(0);
        let (s1, c1) = limb.overflowing_add(add);
        let (s2, c2) = s1.overflowing_add(carry);
        *limb = s2;
        carry = (c1 | c2) as u64;
    }
}

fn sub_at(limbs: &mut [u64], value: u128, limb_idx: usize) {
    let mut borrow = 0u64;
    let parts = [value as u64, (value >> 64) as u64];
    for (i, limb) in limbs.iter_mut().enumerate().skip(limb_idx) {
        let k = i - limb_idx;
        if k >= parts.len() && borrow == 0 {
            break;
        }
        let sub = parts.get(k).copied().unwrap_or(0);
        let (s1, b1) = limb.overflowing_sub(sub);
        let (s2, b2) = s1.overflowing_sub(borrow);
        *limb = s2;
        borrow = (b1 | b2) as u64;
    }
}

fn negate_limbs(limbs: &mut [u64]) {
    for l in limbs.iter_mut() {
        *l = !*l;
    }
    add_at(limbs, 1, 0);
}
