//! Unified format handle and the textual descriptor grammar.
//!
//! Descriptors: `posit<N>es<s>`, `log<N>es<s>-<alpha>-<beta>-<gamma>`,
//! `logieee<e>e<f>-<alpha>-<beta>-<gamma>`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;

use crate::decoded::Decoded;
use crate::error::{Error, Result};
use crate::lns::{self, LogConfig, LogEncoding};
use crate::posit::{self, PositConfig};

/// Either family of number format, as named by a descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormatConfig {
    Posit(PositConfig),
    Log(LogConfig),
}

impl FormatConfig {
    pub fn word_bits(&self) -> u32 {
        match self {
            FormatConfig::Posit(p) => p.word_bits(),
            FormatConfig::Log(l) => l.word_bits(),
        }
    }

    pub fn is_log(&self) -> bool {
        matches!(self, FormatConfig::Log(_))
    }

    /// Bytes per element in the binary matrix file format.
    pub fn element_bytes(&self) -> usize {
        if self.word_bits() <= 8 {
            1
        } else {
            2
        }
    }

    /// Largest finite integer exponent.
    pub fn max_exponent(&self) -> i32 {
        match self {
            FormatConfig::Posit(p) => p.max_exponent(),
            FormatConfig::Log(l) => l.max_exponent(),
        }
    }

    pub fn min_exponent(&self) -> i32 {
        match self {
            FormatConfig::Posit(p) => p.min_exponent(),
            FormatConfig::Log(l) => l.min_exponent(),
        }
    }

    pub fn zero_pattern(&self) -> u16 {
        0
    }

    pub fn pattern_mask(&self) -> u16 {
        (((1u32 << self.word_bits()) - 1) & 0xffff) as u16
    }

    /// Pattern of `+f_max`.
    pub fn f_max_pattern(&self) -> u16 {
        match self {
            FormatConfig::Posit(p) => p.f_max_pattern(),
            FormatConfig::Log(l) => l.f_max_pattern(),
        }
    }

    /// Pattern of `+f_min`.
    pub fn f_min_pattern(&self) -> u16 {
        match self {
            FormatConfig::Posit(p) => p.f_min_pattern(),
            FormatConfig::Log(l) => l.f_min_pattern(),
        }
    }

    pub fn negate_pattern(&self, bits: u16) -> u16 {
        match self {
            FormatConfig::Posit(p) => p.negate_pattern(bits),
            FormatConfig::Log(l) => l.negate_pattern(bits),
        }
    }

    /// `20 log10(f_max / f_min)`, rounded to one decimal place.
    pub fn dynamic_range_db(&self) -> f64 {
        match self {
            FormatConfig::Posit(p) => p.dynamic_range_db(),
            FormatConfig::Log(l) => {
                let f = l.payload_bits();
                let span = (l.max_key() - l.min_key()) as f64 / (1u64 << f) as f64;
                let db = 20.0 * span * std::f64::consts::LOG10_2;
                (db * 10.0).round() / 10.0
            }
        }
    }

    /// Fraction bits at peak precision.
    pub fn max_fraction_bits(&self) -> u32 {
        match self {
            FormatConfig::Posit(p) => p.max_fraction_bits(),
            FormatConfig::Log(l) => l.payload_bits(),
        }
    }

    /// Decodes a word; errors only on IEEE-style NaN/unfushed-denormal input.
    pub fn decode(&self, bits: u16) -> Result<Decoded> {
        match self {
            FormatConfig::Posit(p) => Ok(posit::decode(bits, p)),
            FormatConfig::Log(l) => lns::decode_log(bits, l),
        }
    }

    /// Round-to-nearest encoding of an exact rational.
    pub fn encode_rational(&self, x: &BigRational) -> Result<u16> {
        match self {
            FormatConfig::Posit(p) => Ok(posit::encode_rational(x, p)),
            FormatConfig::Log(l) => lns::encode_rational(x, l),
        }
    }

    /// Round-to-nearest encoding of a finite `f64`.
    pub fn encode_f64(&self, x: f64) -> Result<u16> {
        match self {
            FormatConfig::Posit(p) => {
                Ok(posit::encode(&crate::dyadic::DyadicValue::from_f64(x)?, p))
            }
            FormatConfig::Log(l) => lns::encode_f64(x, l),
        }
    }

    /// Exact display of a decoded value: decimal for linear formats,
    /// `2^<exact decimal>` for log formats, `0` / `inf` / `-inf` for specials.
    pub fn value_string(&self, d: &Decoded) -> String {
        match d {
            Decoded::Zero => "0".into(),
            Decoded::Infinity { negative } => {
                if *negative && !matches!(self, FormatConfig::Posit(_)) {
                    "-inf".into()
                } else {
                    "inf".into()
                }
            }
            Decoded::Normal { negative, .. } => match self {
                FormatConfig::Posit(_) => d.to_dyadic().unwrap().to_string(),
                FormatConfig::Log(l) => {
                    let f = l.payload_bits();
                    let key = d.log_key(f).unwrap();
                    let exponent = crate::dyadic::DyadicValue::new(
                        num_bigint::BigInt::from(key),
                        -(f as i64),
                    );
                    format!("{}2^{}", if *negative { "-" } else { "" }, exponent)
                }
            },
        }
    }

    /// Approximate numeric value, for error reports.
    pub fn approx_f64(&self, d: &Decoded) -> f64 {
        match d {
            Decoded::Zero => 0.0,
            Decoded::Infinity { negative } => {
                if *negative {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            Decoded::Normal { negative, .. } => match self {
                FormatConfig::Posit(_) => d.to_dyadic().unwrap().to_f64(),
                FormatConfig::Log(l) => {
                    let f = l.payload_bits();
                    let y = d.log_key(f).unwrap() as f64 / (1u64 << f) as f64;
                    let v = y.exp2();
                    if *negative {
                        -v
                    } else {
                        v
                    }
                }
            },
        }
    }
}

impl fmt::Display for FormatConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatConfig::Posit(p) => {
                write!(f, "posit{}es{}", p.word_bits(), p.exponent_scale())
            }
            FormatConfig::Log(l) => match l.encoding() {
                LogEncoding::PositTapered(p) => write!(
                    f,
                    "log{}es{}-{}-{}-{}",
                    p.word_bits(),
                    p.exponent_scale(),
                    l.alpha(),
                    l.beta(),
                    l.gamma()
                ),
                LogEncoding::IeeeStyle {
                    exp_bits,
                    frac_bits,
                    ..
                } => write!(
                    f,
                    "logieee{}e{}-{}-{}-{}",
                    exp_bits,
                    frac_bits,
                    l.alpha(),
                    l.beta(),
                    l.gamma()
                ),
            },
        }
    }
}

fn parse_u32(s: &str, what: &str, src: &str) -> Result<u32> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad {what} in format descriptor {src:?}")))
}

/// Splits `"<a>-<b>-<c>"` suffixes.
fn parse_abg(s: &str, src: &str) -> Result<(u32, u32, u32)> {
    let parts: Vec<&str> = s.split('-').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "expected -<alpha>-<beta>-<gamma> suffix in {src:?}"
        )));
    }
    Ok((
        parse_u32(parts[0], "alpha", src)?,
        parse_u32(parts[1], "beta", src)?,
        parse_u32(parts[2], "gamma", src)?,
    ))
}

impl FromStr for FormatConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("posit") {
            let (n, es) = rest
                .split_once("es")
                .ok_or_else(|| Error::Parse(format!("expected posit<N>es<s>, got {s:?}")))?;
            let cfg = PositConfig::new(parse_u32(n, "N", s)?, parse_u32(es, "s", s)?)?;
            return Ok(FormatConfig::Posit(cfg));
        }
        if let Some(rest) = s.strip_prefix("logieee") {
            let (head, abg) = rest
                .split_once('-')
                .ok_or_else(|| Error::Parse(format!("expected logieee<e>e<f>-..., got {s:?}")))?;
            let (e, f) = head
                .split_once('e')
                .ok_or_else(|| Error::Parse(format!("expected logieee<e>e<f>, got {s:?}")))?;
            let (alpha, beta, gamma) = parse_abg(abg, s)?;
            let cfg = LogConfig::new(
                LogEncoding::IeeeStyle {
                    exp_bits: parse_u32(e, "exponent bits", s)?,
                    frac_bits: parse_u32(f, "fraction bits", s)?,
                    flush_denormals_to_zero: true,
                },
                alpha,
                beta,
                gamma,
            )?;
            return Ok(FormatConfig::Log(cfg));
        }
        if let Some(rest) = s.strip_prefix("log") {
            let (head, abg) = rest
                .split_once('-')
                .ok_or_else(|| Error::Parse(format!("expected log<N>es<s>-..., got {s:?}")))?;
            let (n, es) = head
                .split_once("es")
                .ok_or_else(|| Error::Parse(format!("expected log<N>es<s>, got {s:?}")))?;
            let (alpha, beta, gamma) = parse_abg(abg, s)?;
            let posit = PositConfig::new(parse_u32(n, "N", s)?, parse_u32(es, "s", s)?)?;
            let cfg = LogConfig::new(LogEncoding::PositTapered(posit), alpha, beta, gamma)?;
            return Ok(FormatConfig::Log(cfg));
        }
        Err(Error::Parse(format!(
            "unknown format descriptor {s:?} (expected posit..., log..., or logieee...)"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_round_trip() {
        for s in ["posit8es1", "posit16es1", "log8es1-5-5-7", "logieee5e10-11-11-10"] {
            let cfg: FormatConfig = s.parse().unwrap();
            assert_eq!(cfg.to_string(), s);
        }
    }

    #[test]
    fn descriptor_errors_cite_constraints() {
        // gamma > F+3 for (8,1): F = 4
        let err = "log8es1-5-5-8".parse::<FormatConfig>().unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
        // alpha < F+1
        let err = "log8es1-4-5-7".parse::<FormatConfig>().unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
        assert!("posit8".parse::<FormatConfig>().is_err());
        assert!("float32".parse::<FormatConfig>().is_err());
        assert!("posit20es1".parse::<FormatConfig>().is_err());
    }

    #[test]
    fn value_strings() {
        let cfg: FormatConfig = "posit8es1".parse().unwrap();
        assert_eq!(cfg.value_string(&cfg.decode(0x40).unwrap()), "1");
        assert_eq!(cfg.value_string(&cfg.decode(0x00).unwrap()), "0");
        assert_eq!(cfg.value_string(&cfg.decode(0x80).unwrap()), "inf");
        let log: FormatConfig = "log8es1-5-5-7".parse().unwrap();
        assert_eq!(log.value_string(&log.decode(0x48).unwrap()), "2^0.5");
        assert_eq!(log.value_string(&log.decode(0x40).unwrap()), "2^0");
    }

    #[test]
    fn exponent_bounds() {
        let p: FormatConfig = "posit8es1".parse().unwrap();
        assert_eq!((p.min_exponent(), p.max_exponent()), (-12, 12));
        let l: FormatConfig = "logieee5e10-11-11-10".parse().unwrap();
        assert_eq!((l.min_exponent(), l.max_exponent()), (-14, 15));
    }
}
