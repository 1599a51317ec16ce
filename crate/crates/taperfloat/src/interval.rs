//! Interval-bounded fixed-point evaluation of `2^x` and `log2(x)`.
//!
//! Lookup-table entries are round-to-nearest-even images of transcendental
//! values, so each entry is computed as an integer interval that provably
//! brackets the true value, and the rounding is accepted only once both
//! endpoints round identically. All bounds are directed (floor on the low
//! side, ceiling on the high side); no native float is involved.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Bounds `lo <= 2^(f / 2^f_bits) * 2^work_bits <= hi` for `0 <= f < 2^f_bits`.
///
/// `2^(f/2^F)` is built as a product of repeated square roots of two, one per
/// set bit of `f`, with floor/ceil rounding tracked separately.
pub fn exp2_bounds(f: u64, f_bits: u32, work_bits: u32) -> (BigUint, BigUint) {
    assert!(f_bits == 0 || f < (1u64 << f_bits));
    let unit = BigUint::one() << work_bits;
    // roots[k] brackets 2^(2^-(k+1)) for k = 0 .. f_bits-1.
    let mut roots = Vec::with_capacity(f_bits as usize);
    let mut lo = &unit << 1u32;
    let mut hi = lo.clone();
    for _ in 0..f_bits {
        lo = (&lo << work_bits).sqrt();
        hi = (&hi << work_bits).sqrt() + 1u32;
        roots.push((lo.clone(), hi.clone()));
    }
    let mut acc_lo = unit.clone();
    let mut acc_hi = unit;
    for j in 0..f_bits {
        if f >> j & 1 == 1 {
            let (r_lo, r_hi) = &roots[(f_bits - 1 - j) as usize];
            acc_lo = (acc_lo * r_lo) >> work_bits;
            acc_hi = ((acc_hi * r_hi) >> work_bits) + 1u32;
        }
    }
    (acc_lo, acc_hi)
}

/// Bounds `lo <= log2(num/den) * 2^prec <= hi` for `num/den` in `[1, 2)`.
///
/// Classic bit-by-bit extraction: square the mantissa, emit 1 and halve when
/// it reaches 2. If interval growth ever makes a bit undecidable the
/// remaining bits are returned as a full-width slack, which still brackets
/// the true value; callers refine by retrying with more working precision.
pub fn log2_frac_bounds(num: &BigUint, den: &BigUint, prec: u32) -> (BigUint, BigUint) {
    let work_bits = prec + 64;
    let unit = BigUint::one() << work_bits;
    debug_assert!(num >= den && *num < (den << 1u32));
    let mut y_lo = (num << work_bits) / den;
    let mut y_hi = &y_lo + 1u32;
    let two = &unit << 1u32;
    let mut acc = BigUint::zero();
    for i in 0..prec {
        y_lo = (&y_lo * &y_lo) >> work_bits;
        y_hi = ((&y_hi * &y_hi) >> work_bits) + 1u32;
        if y_lo >= two {
            acc = (acc << 1u32) | BigUint::one();
            y_lo >>= 1u32;
            y_hi = (&y_hi + 1u32) >> 1u32;
        } else if y_hi < two {
            acc <<= 1u32;
        } else {
            // Undecided bit: bracket the remaining fraction wholesale.
            let slack = prec - i;
            return ((&acc) << slack, (acc + 1u32) << slack);
        }
    }
    (acc.clone(), acc + 1u32)
}

/// `floor(log2(num/den))` for positive `num`, `den`.
pub fn floor_log2_ratio(num: &BigUint, den: &BigUint) -> i64 {
    assert!(!num.is_zero() && !den.is_zero());
    let mut e = num.bits() as i64 - den.bits() as i64;
    // num/den is within a factor of two of 2^e; settle the boundary exactly.
    let scaled_den = if e >= 0 {
        den << e as u64
    } else {
        den.clone()
    };
    let scaled_num = if e >= 0 {
        num.clone()
    } else {
        num << (-e) as u64
    };
    if scaled_num < scaled_den {
        e -= 1;
    }
    e
}

/// Splits `log2(num/den)` into its floor `e` and fractional bounds
/// `lo <= frac * 2^prec <= hi` with `frac` in `[0, 1)`.
pub fn log2_ratio_bounds(num: &BigUint, den: &BigUint, prec: u32) -> (i64, (BigUint, BigUint)) {
    let e = floor_log2_ratio(num, den);
    let (mant_num, mant_den) = if e >= 0 {
        (num.clone(), den << e as u64)
    } else {
        (num << (-e) as u64, den.clone())
    };
    (e, log2_frac_bounds(&mant_num, &mant_den, prec))
}

/// `Some(k)` when `num/den` is exactly `2^k`.
pub fn exact_pow2(num: &BigUint, den: &BigUint) -> Option<i64> {
    let e = floor_log2_ratio(num, den);
    let eq = if e >= 0 {
        *num == (den << e as u64)
    } else {
        (num << (-e) as u64) == *den
    };
    eq.then_some(e)
}

/// Rounds `x / 2^drop_bits` to the nearest integer, ties to even.
pub fn rne_shift(x: &BigUint, drop_bits: u32) -> BigUint {
    if drop_bits == 0 {
        return x.clone();
    }
    let q = x >> drop_bits;
    let rem = x - (&q << drop_bits);
    let half = BigUint::one() << (drop_bits - 1);
    match rem.cmp(&half) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1u32,
        std::cmp::Ordering::Equal => {
            if (&q & BigUint::one()).is_zero() {
                q
            } else {
                q + 1u32
            }
        }
    }
}

/// RNE of a bracketed value down to `drop_bits` fewer fraction bits, or
/// `None` when the bracket does not pin the result.
pub fn rne_from_bounds(lo: &BigUint, hi: &BigUint, drop_bits: u32) -> Option<BigUint> {
    let r_lo = rne_shift(lo, drop_bits);
    let r_hi = rne_shift(hi, drop_bits);
    (r_lo == r_hi).then_some(r_lo)
}
