//! Rounding optimality: the encoder must agree with an independent
//! brute-force nearest-value scan for large batches of random exact inputs.
//!
//! The scanner here shares no code with the encoder: values are flattened
//! to `(significand, exponent)` pairs and distances compared in plain i128
//! arithmetic at a common alignment.

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use taperfloat::dyadic::DyadicValue;
use taperfloat::posit::{self, PositConfig};

/// All finite values of a config as `(pattern, signed_sig, exp)` with
/// `value = signed_sig * 2^exp`.
fn value_set(cfg: &PositConfig) -> Vec<(u16, i64, i64)> {
    posit::enumerate(cfg)
        .into_iter()
        .filter_map(|(p, d)| {
            d.to_dyadic().map(|v| {
                let sig: i64 = v.significand().try_into().unwrap();
                (p, sig, v.exponent())
            })
        })
        .collect()
}

/// |a*2^ea - b*2^eb| as an i128 at the common alignment `base`.
fn dist(a: i64, ea: i64, b: i64, eb: i64, base: i64) -> i128 {
    let av = (a as i128) << (ea - base);
    let bv = (b as i128) << (eb - base);
    (av - bv).abs()
}

fn scan_nearest(values: &[(u16, i64, i64)], sig: i64, exp: i64, base: i64) -> u16 {
    let mut best: Option<(i128, u16)> = None;
    for &(p, vs, ve) in values {
        if vs == 0 {
            continue; // nonzero never rounds to zero
        }
        let d = dist(sig, exp, vs, ve, base);
        best = Some(match best {
            None => (d, p),
            Some((bd, bp)) => {
                if d < bd || (d == bd && p % 2 == 0) {
                    (d, p)
                } else {
                    (bd, bp)
                }
            }
        });
    }
    best.unwrap().1
}

fn run_config(n: u32, s: u32, trials: usize, seed: u64) {
    let cfg = PositConfig::new(n, s).unwrap();
    let values = value_set(&cfg);
    let e_max = cfg.max_exponent() as i64;
    let v_min_exp = values.iter().map(|&(_, _, e)| e).min().unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..trials {
        let sig = rng.random_range(-(1i64 << 20)..=1 << 20);
        if sig == 0 {
            continue;
        }
        let exp = rng.random_range(-(e_max + 20)..=e_max + 8);
        let x = DyadicValue::new(BigInt::from(sig), exp);
        // Inputs are canonicalized; use the canonical pair.
        let c_sig: i64 = x.significand().try_into().unwrap();
        let c_exp = x.exponent();
        // Per-trial alignment keeps everything inside i128: the highest bit
        // in play is max(input top, f_max top), the lowest is `base`.
        let base = c_exp.min(v_min_exp);
        let top = (c_exp + 22).max(e_max + 1);
        assert!(top - base < 127, "distance width exceeds i128");
        let got = posit::encode(&x, &cfg);
        let want = scan_nearest(&values, c_sig, c_exp, base);
        assert_eq!(
            got, want,
            "({n},{s}): {sig}*2^{exp} -> {got:#06x}, scan says {want:#06x}"
        );
    }
}

#[test]
fn rounding_optimality_100k_per_8bit_config() {
    for (n, s, seed) in [
        (7u32, 1u32, 101),
        (8, 0, 102),
        (8, 1, 103),
        (8, 2, 104),
        (9, 1, 105),
    ] {
        run_config(n, s, 100_000, seed);
    }
}

#[test]
fn rounding_optimality_16bit_sampled() {
    run_config(16, 1, 2_000, 106);
}
