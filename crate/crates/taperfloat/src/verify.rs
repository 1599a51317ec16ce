//! Self-check suites behind the CLI `verify` command.
//!
//! Each check re-derives a property from first principles (brute force,
//! exact arithmetic, independent reference) rather than trusting the code
//! path it exercises.

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dyadic::{exact_dot, DyadicValue};
use crate::error::Result;
use crate::format::FormatConfig;
use crate::kulisch::{KulischAccumulator, KulischConfig};
use crate::lns::{self, LogConfig, PqTables};
use crate::mac::{dot, dot_accumulate, EngineConfig, Mode};
use crate::oracle;
use crate::posit::{self, PositConfig};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn pass(name: &'static str, detail: String) -> Self {
        Check {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        Check {
            name,
            passed: false,
            detail,
        }
    }
}

/// Runs every suite that applies to the format. `exhaustive` raises the
/// randomized trial counts; the enumerative checks are always exhaustive.
pub fn verify_format(format: &FormatConfig, exhaustive: bool, seed: u64) -> Result<Vec<Check>> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![check_round_trip(format), check_monotone(format)];
    let engine = EngineConfig::new(*format)?;
    checks.push(check_single_element_identity(&engine));
    match format {
        FormatConfig::Posit(p) => {
            let trials = rounding_trials(p.word_bits(), exhaustive);
            checks.push(check_rounding_argmin(p, trials, &mut rng));
            checks.push(check_ema_oracle(
                &engine,
                if exhaustive { 2000 } else { 200 },
                &mut rng,
            ));
        }
        FormatConfig::Log(l) => {
            checks.push(check_lut_identity(l, engine.tables().unwrap()));
        }
    }
    checks.push(check_permutation(
        &engine,
        if exhaustive { 2000 } else { 200 },
        &mut rng,
    ));
    Ok(checks)
}

fn rounding_trials(word_bits: u32, exhaustive: bool) -> usize {
    let base = if exhaustive { 5000 } else { 500 };
    if word_bits > 12 {
        base / 20
    } else {
        base
    }
}

/// decode then encode reproduces every decodable pattern (IEEE NaN,
/// denormal, and negative-zero patterns have no canonical image and are
/// skipped).
pub fn check_round_trip(format: &FormatConfig) -> Check {
    let name = "codec-round-trip";
    let mut tested = 0u64;
    for p in 0..1u32 << format.word_bits() {
        let p = p as u16;
        let Ok(d) = format.decode(p) else { continue };
        if d.is_zero() && p != format.zero_pattern() {
            continue; // flushed denormal or negative zero
        }
        let back = match format {
            FormatConfig::Posit(cfg) => match d.to_dyadic() {
                Some(v) => posit::encode(&v, cfg),
                None => cfg.infinity_pattern(),
            },
            FormatConfig::Log(cfg) => lns::encode_decoded(&d, cfg),
        };
        if back != p {
            return Check::fail(
                name,
                format!("pattern {p:#06x} re-encodes as {back:#06x}"),
            );
        }
        tested += 1;
    }
    Check::pass(name, format!("{tested} patterns"))
}

/// Finite patterns compare as two's-complement integers exactly like their
/// values (positive side only for IEEE sign-magnitude layouts).
pub fn check_monotone(format: &FormatConfig) -> Check {
    let name = "pattern-monotonicity";
    let n = format.word_bits();
    let signed = |p: u16| -> i32 {
        let v = p as i32;
        if v >= 1 << (n - 1) {
            v - (1 << n)
        } else {
            v
        }
    };
    let sign_magnitude = matches!(
        format,
        FormatConfig::Log(l) if matches!(l.encoding(), lns::LogEncoding::IeeeStyle { .. })
    );
    let mut entries: Vec<(i32, f64)> = Vec::new();
    for p in 0..1u32 << n {
        let p = p as u16;
        let Ok(d) = format.decode(p) else { continue };
        if !d.is_normal() {
            continue;
        }
        if sign_magnitude && p >> (n - 1) == 1 {
            continue;
        }
        entries.push((signed(p), format.approx_f64(&d)));
    }
    entries.sort_by_key(|&(p, _)| p);
    for w in entries.windows(2) {
        if w[0].1.partial_cmp(&w[1].1) != Some(std::cmp::Ordering::Less) {
            return Check::fail(
                name,
                format!("pattern {} value !< pattern {}", w[0].0, w[1].0),
            );
        }
    }
    Check::pass(name, format!("{} finite patterns ordered", entries.len()))
}

/// Random exact inputs: the encoder must agree with brute-force
/// nearest-by-distance over the enumerated value set.
pub fn check_rounding_argmin(cfg: &PositConfig, trials: usize, rng: &mut ChaCha8Rng) -> Check {
    let name = "rounding-optimality";
    let span = cfg.max_exponent() + 8;
    for t in 0..trials {
        let sig = rng.random_range(-(1i64 << 20)..=1 << 20);
        let exp = rng.random_range(-span as i64..=span as i64);
        let x = DyadicValue::new(BigInt::from(sig), exp);
        if x.is_zero() {
            continue;
        }
        let got = posit::encode(&x, cfg);
        let want = oracle::nearest_by_enumeration(&x, cfg);
        if got != want {
            return Check::fail(
                name,
                format!("trial {t}: {sig}*2^{exp} -> {got:#06x}, argmin {want:#06x}"),
            );
        }
    }
    Check::pass(name, format!("{trials} random dyadic inputs"))
}

/// The log-to-linear-to-log identity over every fraction value.
pub fn check_lut_identity(cfg: &LogConfig, tables: &PqTables) -> Check {
    let name = "lut-round-trip-identity";
    match log_round_trip_identity(cfg, tables) {
        Ok(count) => Check::pass(name, format!("{count} fraction values")),
        Err(msg) => Check::fail(name, msg),
    }
}

/// `f = r(q(r(r(p(f), alpha), beta)), gamma)` rounded back to `F` bits, for
/// all `f`. Exposed so tests can aim it at deliberately corrupted tables.
pub fn log_round_trip_identity(
    cfg: &LogConfig,
    tables: &PqTables,
) -> std::result::Result<u64, String> {
    let f_bits = cfg.payload_bits();
    for f in 0..1u64 << f_bits {
        let d = crate::decoded::Decoded::Normal {
            negative: false,
            exponent: 0,
            fraction: f,
            fraction_width: f_bits,
        };
        let (neg, m, sig) = lns::log_to_linear(&d, tables).map_err(|e| e.to_string())?;
        let frac = sig - (1 << tables.alpha);
        let bits = lns::linear_to_log(neg, m, frac, tables.alpha, false, tables, cfg);
        let back = lns::decode_log(bits, cfg).map_err(|e| e.to_string())?;
        if back != d {
            return Err(format!("fraction {f:#b} maps back to {back:?}"));
        }
    }
    Ok(1 << f_bits)
}

/// Accumulating a single decoded value and converting equals the codec.
pub fn check_single_element_identity(engine: &EngineConfig) -> Check {
    let name = "single-element-identity";
    let format = engine.format();
    let mut tested = 0u64;
    for p in 0..1u32 << format.word_bits() {
        let p = p as u16;
        let Ok(d) = format.decode(p) else { continue };
        if !d.is_normal() {
            continue;
        }
        let mut acc = KulischAccumulator::new(KulischConfig::for_format(format));
        match format {
            FormatConfig::Posit(_) => {
                let (neg, sig, scale) = d.to_parts().unwrap();
                acc.accumulate(neg, sig, scale);
            }
            FormatConfig::Log(_) => {
                let tables = engine.tables().unwrap();
                let (neg, m, sig) = lns::log_to_linear(&d, tables).unwrap();
                acc.accumulate(neg, sig, m - tables.alpha as i64);
            }
        }
        match acc.to_encoded(format, engine.tables(), 0) {
            Ok(bits) if bits == p => tested += 1,
            Ok(bits) => {
                return Check::fail(name, format!("{p:#06x} converts to {bits:#06x}"))
            }
            Err(e) => return Check::fail(name, format!("{p:#06x}: {e}")),
        }
    }
    Check::pass(name, format!("{tested} values"))
}

fn random_finite_words(
    len: usize,
    format: &FormatConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<u16> {
    (0..len)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            format.encode_f64(x).unwrap()
        })
        .collect()
}

/// Dot products are invariant under any shared permutation of the inputs.
pub fn check_permutation(engine: &EngineConfig, trials: usize, rng: &mut ChaCha8Rng) -> Check {
    let name = "permutation-invariance";
    let format = engine.format();
    let mode = engine.natural_mode();
    for t in 0..trials {
        let len = rng.random_range(1..=128);
        let a = random_finite_words(len, format, rng);
        let b = random_finite_words(len, format, rng);
        let reference = match dot(&a, &b, engine, mode) {
            Ok(bits) => bits,
            Err(_) => continue,
        };
        let mut idx: Vec<usize> = (0..len).collect();
        for i in (1..len).rev() {
            idx.swap(i, rng.random_range(0..=i));
        }
        let pa: Vec<u16> = idx.iter().map(|&i| a[i]).collect();
        let pb: Vec<u16> = idx.iter().map(|&i| b[i]).collect();
        let permuted = dot(&pa, &pb, engine, mode).unwrap();
        if permuted != reference {
            return Check::fail(
                name,
                format!("trial {t}: {reference:#06x} vs {permuted:#06x} after permutation"),
            );
        }
    }
    Check::pass(name, format!("{trials} trials"))
}

/// EMA dot equals the exact sum followed by one rounding whenever no
/// truncation or saturation was flagged.
pub fn check_ema_oracle(engine: &EngineConfig, trials: usize, rng: &mut ChaCha8Rng) -> Check {
    let name = "ema-oracle-equivalence";
    let format = engine.format();
    let mut compared = 0u64;
    for t in 0..trials {
        let len = rng.random_range(1..=256);
        let a = random_finite_words(len, format, rng);
        let b = random_finite_words(len, format, rng);
        let acc = dot_accumulate(&a, &b, engine, Mode::Ema).unwrap();
        if acc.overflow_flag() || acc.truncation_flag() {
            continue;
        }
        let got = acc
            .to_encoded(format, None, engine.bias_n())
            .expect("flags are clear");
        let decode_all = |v: &[u16]| -> Vec<DyadicValue> {
            v.iter()
                .map(|&p| format.decode(p).unwrap().to_dyadic().unwrap())
                .collect()
        };
        let exact = exact_dot(&decode_all(&a), &decode_all(&b)).unwrap();
        let want = oracle::round_nearest_even(&exact, format).unwrap();
        if got != want {
            return Check::fail(
                name,
                format!("trial {t}: engine {got:#06x}, oracle {want:#06x}"),
            );
        }
        compared += 1;
    }
    Check::pass(name, format!("{compared} of {trials} trials comparable"))
}
