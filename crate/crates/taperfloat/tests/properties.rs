//! Property tests for the exact-arithmetic invariants.

use num_bigint::BigInt;
use proptest::prelude::*;
use taperfloat::dyadic::{exact_dot, DyadicValue};
use taperfloat::kulisch::{KulischAccumulator, KulischConfig};
use taperfloat::posit::{self, PositConfig};

fn dyadic() -> impl Strategy<Value = DyadicValue> {
    (any::<i64>(), -200i64..200).prop_map(|(sig, exp)| DyadicValue::new(BigInt::from(sig), exp))
}

proptest! {
    #[test]
    fn dyadic_ring_laws(a in dyadic(), b in dyadic(), c in dyadic()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn dyadic_order_consistent_with_subtraction(a in dyadic(), b in dyadic()) {
        let diff = &a - &b;
        match a.cmp(&b) {
            std::cmp::Ordering::Less => prop_assert!(diff.is_negative()),
            std::cmp::Ordering::Equal => prop_assert!(diff.is_zero()),
            std::cmp::Ordering::Greater => {
                prop_assert!(!diff.is_negative() && !diff.is_zero())
            }
        }
    }

    #[test]
    fn exact_dot_permutation_invariant(
        pairs in proptest::collection::vec((dyadic(), dyadic()), 1..40),
        seed in any::<u64>(),
    ) {
        let (a, b): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let reference = exact_dot(&a, &b).unwrap();
        let mut idx: Vec<usize> = (0..a.len()).collect();
        // Cheap deterministic shuffle.
        let mut state = seed | 1;
        for i in (1..idx.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            idx.swap(i, (state >> 33) as usize % (i + 1));
        }
        let pa: Vec<_> = idx.iter().map(|&i| a[i].clone()).collect();
        let pb: Vec<_> = idx.iter().map(|&i| b[i].clone()).collect();
        prop_assert_eq!(exact_dot(&pa, &pb).unwrap(), reference);
    }

    #[test]
    fn posit_encode_identity_on_representables(
        pattern in 0u16..=255,
        s in 0u32..=2,
    ) {
        let cfg = PositConfig::new(8, s).unwrap();
        if let Some(v) = posit::decode(pattern, &cfg).to_dyadic() {
            prop_assert_eq!(posit::encode(&v, &cfg), pattern);
        }
    }

    #[test]
    fn accumulator_reverses_exactly(
        entries in proptest::collection::vec(
            // Magnitudes at most 16 so no partial sum over 128 entries can
            // reach the (8,1) register limit of 8192; saturation clamps are
            // order-dependent by nature and tested separately.
            (any::<bool>(), 1u64..(1 << 12), -32i64..=-8),
            1..64
        ),
    ) {
        // Adding values then their negations restores the empty register,
        // regardless of interleaving (truncation is sign-symmetric).
        let cfg = KulischConfig::for_format(&"posit8es1".parse().unwrap());
        let mut acc = KulischAccumulator::new(cfg);
        for &(neg, sig, exp) in &entries {
            acc.accumulate(neg, sig, exp);
        }
        for &(neg, sig, exp) in &entries {
            acc.accumulate(!neg, sig, exp);
        }
        prop_assert!(!acc.overflow_flag());
        prop_assert!(acc.is_zero());
    }
}
