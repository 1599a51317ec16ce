//! Exact arithmetic on dyadic rationals (integer times a power of two).
//!
//! Every linear-domain quantity in this crate (decoded posits, products,
//! accumulator contents) is a dyadic rational, so a `DyadicValue` can hold
//! any of them without rounding. Sums and products of dyadic values are again
//! dyadic, which is what makes this type usable as ground truth.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An exact value of the form `significand * 2^exponent`.
///
/// Canonical form: the significand is odd or zero, and zero is `(0, 0)`.
/// The significand is unbounded; nothing in this type ever rounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicValue {
    significand: BigInt,
    exponent: i64,
}

impl DyadicValue {
    /// Builds a value from raw parts, normalizing to canonical form.
    pub fn new(significand: BigInt, exponent: i64) -> Self {
        if significand.is_zero() {
            return Self::zero();
        }
        let shift = significand.trailing_zeros().unwrap_or(0);
        DyadicValue {
            significand: &significand >> shift,
            exponent: exponent + shift as i64,
        }
    }

    pub fn zero() -> Self {
        DyadicValue {
            significand: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        DyadicValue {
            significand: BigInt::from(1),
            exponent: 0,
        }
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        DyadicValue {
            significand: BigInt::from(1),
            exponent: k,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    /// Exact conversion of a finite `f64`; every finite double is dyadic.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let mantissa = bits & ((1u64 << 52) - 1);
        let (sig, exp) = if exp_field == 0 {
            (mantissa, -1074)
        } else {
            (mantissa | (1u64 << 52), exp_field - 1075)
        };
        let mut sig = BigInt::from(sig);
        if negative {
            sig = -sig;
        }
        Ok(Self::new(sig, exp))
    }

    pub fn significand(&self) -> &BigInt {
        &self.significand
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.significand.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.significand.is_negative()
    }

    pub fn abs(&self) -> Self {
        DyadicValue {
            significand: self.significand.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `2^k` (exact).
    pub fn times_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        DyadicValue {
            significand: self.significand.clone(),
            exponent: self.exponent + k,
        }
    }

    /// `floor(log2(|x|))` for nonzero `x`.
    pub fn floor_log2(&self) -> i64 {
        debug_assert!(!self.is_zero());
        self.significand.bits() as i64 - 1 + self.exponent
    }

    /// Compares magnitudes.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        cmp_magnitude(
            self.significand.magnitude().bits(),
            &self.significand,
            self.exponent,
            other.significand.magnitude().bits(),
            &other.significand,
            other.exponent,
        )
    }

    /// Nearest `f64` (approximate; for reporting only).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // Reduce to at most 64 significand bits first so huge exact sums
        // still convert sensibly.
        let bits = self.significand.bits();
        let (sig, exp) = if bits > 64 {
            let drop = (bits - 64) as i64;
            ((&self.significand >> drop).to_f64().unwrap(), self.exponent + drop)
        } else {
            (self.significand.to_f64().unwrap(), self.exponent)
        };
        if exp > i32::MAX as i64 {
            return if sig < 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        if exp < i32::MIN as i64 {
            return if sig < 0.0 { -0.0 } else { 0.0 };
        }
        sig * 2f64.powi(exp as i32)
    }
}

/// Exact magnitude comparison of `|a_sig| * 2^a_exp` vs `|b_sig| * 2^b_exp`.
fn cmp_magnitude(
    a_bits: u64,
    a_sig: &BigInt,
    a_exp: i64,
    b_bits: u64,
    b_sig: &BigInt,
    b_exp: i64,
) -> Ordering {
    if a_bits == 0 || b_bits == 0 {
        return a_bits.cmp(&b_bits);
    }
    // Positions of the leading bits decide unless they coincide.
    let a_top = a_bits as i64 + a_exp;
    let b_top = b_bits as i64 + b_exp;
    if a_top != b_top {
        return a_top.cmp(&b_top);
    }
    // Same leading-bit position: align and compare significands. Small
    // values (the overwhelmingly common case) stay in u128.
    let shift = a_exp - b_exp;
    if a_bits <= 64 && b_bits <= 64 {
        let a = a_sig.magnitude().to_u64().unwrap() as u128;
        let b = b_sig.magnitude().to_u64().unwrap() as u128;
        return if shift >= 0 {
            (a << shift).cmp(&b)
        } else {
            a.cmp(&(b << -shift))
        };
    }
    if shift >= 0 {
        (a_sig.magnitude() << shift as u64).cmp(b_sig.magnitude())
    } else {
        a_sig.magnitude().cmp(&(b_sig.magnitude() << (-shift) as u64))
    }
}

impl Ord for DyadicValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let a_neg = self.is_negative();
        let b_neg = other.is_negative();
        match (a_neg, b_neg) {
            (false, true) => return Ordering::Greater,
            (true, false) => return Ordering::Less,
            _ => {}
        }
        let mag = self.cmp_abs(other);
        if a_neg {
            mag.reverse()
        } else {
            mag
        }
    }
}

impl PartialOrd for DyadicValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicValue {
    type Output = DyadicValue;

    fn add(self, rhs: &DyadicValue) -> DyadicValue {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        // Align to the smaller exponent; the result is exact.
        let exp = self.exponent.min(rhs.exponent);
        let a = &self.significand << (self.exponent - exp) as u64;
        let b = &rhs.significand << (rhs.exponent - exp) as u64;
        DyadicValue::new(a + b, exp)
    }
}

impl Sub for &DyadicValue {
    type Output = DyadicValue;

    fn sub(self, rhs: &DyadicValue) -> DyadicValue {
        self + &(-rhs)
    }
}

impl Mul for &DyadicValue {
    type Output = DyadicValue;

    fn mul(self, rhs: &DyadicValue) -> DyadicValue {
        if self.is_zero() || rhs.is_zero() {
            return DyadicValue::zero();
        }
        // Product of odd significands is odd; already canonical.
        DyadicValue {
            significand: &self.significand * &rhs.significand,
            exponent: self.exponent + rhs.exponent,
        }
    }
}

impl Neg for &DyadicValue {
    type Output = DyadicValue;

    fn neg(self) -> DyadicValue {
        DyadicValue {
            significand: -&self.significand,
            exponent: if self.is_zero() { 0 } else { self.exponent },
        }
    }
}

impl Neg for DyadicValue {
    type Output = DyadicValue;

    fn neg(self) -> DyadicValue {
        -&self
    }
}

/// Exact inner product `sum(a[i] * b[i])`.
pub fn exact_dot(a: &[DyadicValue], b: &[DyadicValue]) -> Result<DyadicValue> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut sum = DyadicValue::zero();
    for (x, y) in a.iter().zip(b) {
        sum = &sum + &(x * y);
    }
    Ok(sum)
}

impl fmt::Display for DyadicValue {
    /// Exact decimal expansion; dyadic rationals always terminate.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.is_negative() {
            write!(f, "-")?;
        }
        let mag = self.significand.magnitude();
        if self.exponent >= 0 {
            return write!(f, "{}", mag << self.exponent as u64);
        }
        let k = (-self.exponent) as u32;
        // sig * 2^-k = sig * 5^k / 10^k; the significand is odd, so the
        // digit string has no trailing zeros to strip.
        let scaled = mag * num_bigint::BigUint::from(5u32).pow(k);
        let digits = scaled.to_string();
        if digits.len() > k as usize {
            let (int_part, frac_part) = digits.split_at(digits.len() - k as usize);
            write!(f, "{int_part}.{frac_part}")
        } else {
            write!(f, "0.{}{}", "0".repeat(k as usize - digits.len()), digits)
        }
    }
}

impl From<&DyadicValue> for num_rational::BigRational {
    fn from(v: &DyadicValue) -> Self {
        let one = BigInt::from(1);
        if v.exponent >= 0 {
            num_rational::BigRational::new(&v.significand << v.exponent as u64, one)
        } else {
            num_rational::BigRational::new(
                v.significand.clone(),
                one << (-v.exponent) as u64,
            )
        }
    }
}

impl From<BigInt> for DyadicValue {
    fn from(v: BigInt) -> Self {
        Self::new(v, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(sig: i64, exp: i64) -> DyadicValue {
        DyadicValue::new(BigInt::from(sig), exp)
    }

    #[test]
    fn canonical_form() {
        let v = dy(12, -2); // 12 * 2^-2 = 3 * 2^0
        assert_eq!(v.significand(), &BigInt::from(3));
        assert_eq!(v.exponent(), 0);
        assert_eq!(dy(0, 5), DyadicValue::zero());
    }

    #[test]
    fn add_examples() {
        assert_eq!(&DyadicValue::one() + &DyadicValue::one(), dy(1, 1));
        let x = dy(-7, 3);
        assert!((&x + &(-&x)).is_zero());
        // 2^-24 + 2^12 = (2^36 + 1) * 2^-24
        let sum = &DyadicValue::pow2(-24) + &DyadicValue::pow2(12);
        assert_eq!(sum.significand(), &((BigInt::from(1) << 36) + 1));
        assert_eq!(sum.exponent(), -24);
    }

    #[test]
    fn mul_examples() {
        let x = dy(11, -4);
        assert_eq!(&DyadicValue::one() * &x, x);
        assert_eq!(&dy(3, -2) * &dy(3, -2), dy(9, -4));
        assert!((&DyadicValue::zero() * &x).is_zero());
    }

    #[test]
    fn exact_dot_examples() {
        let one = DyadicValue::one();
        assert_eq!(
            exact_dot(std::slice::from_ref(&one), std::slice::from_ref(&one)).unwrap(),
            DyadicValue::one()
        );
        let a = [one.clone(), -&one];
        let b = [one.clone(), one.clone()];
        assert!(exact_dot(&a, &b).unwrap().is_zero());
        // 256 products of 2^-24 each sum to 2^-16.
        let tiny = vec![DyadicValue::pow2(-24); 256];
        let ones = vec![DyadicValue::one(); 256];
        assert_eq!(exact_dot(&tiny, &ones).unwrap(), DyadicValue::pow2(-16));
    }

    #[test]
    fn exact_dot_length_mismatch() {
        let r = exact_dot(&[DyadicValue::one()], &[]);
        assert!(matches!(r, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn from_f64_exact() {
        assert_eq!(DyadicValue::from_f64(0.75).unwrap(), dy(3, -2));
        assert_eq!(DyadicValue::from_f64(-2.0).unwrap(), dy(-1, 1));
        assert!(DyadicValue::from_f64(f64::NAN).is_err());
        assert!(DyadicValue::from_f64(f64::INFINITY).is_err());
        // Subnormal doubles convert exactly too.
        let sub = f64::from_bits(3);
        assert_eq!(DyadicValue::from_f64(sub).unwrap(), dy(3, -1074));
    }

    #[test]
    fn ordering() {
        assert!(dy(1, -12) < dy(1, 0));
        assert!(dy(-1, 8) < dy(1, -30));
        assert!(dy(3, -1) > dy(1, 0));
        assert_eq!(dy(5, 2).cmp(&dy(5, 2)), Ordering::Equal);
        // Same leading-bit position, differing low bits.
        assert!(dy(9, -3) > dy(17, -4));
    }

    #[test]
    fn decimal_display() {
        assert_eq!(dy(3, -2).to_string(), "0.75");
        assert_eq!(dy(-3, -2).to_string(), "-0.75");
        assert_eq!(dy(1, 12).to_string(), "4096");
        assert_eq!(dy(1, -12).to_string(), "0.000244140625");
        assert_eq!(DyadicValue::zero().to_string(), "0");
    }

    #[test]
    fn floor_log2() {
        assert_eq!(dy(1, 0).floor_log2(), 0);
        assert_eq!(dy(3, -2).floor_log2(), -1); // 0.75
        assert_eq!(dy(3, -1).floor_log2(), 0); // 1.5
        assert_eq!(dy(1, 12).floor_log2(), 12);
        assert_eq!(dy(1, -12).floor_log2(), -12);
    }
}
