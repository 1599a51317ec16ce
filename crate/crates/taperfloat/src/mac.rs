//! EMA and ELMA multiply-add pipelines over the Kulisch accumulator.
//!
//! EMA (linear posit): the two decoded significands multiply exactly in
//! integer arithmetic and the double-width product shifts into the
//! accumulator; the only rounding is the final conversion.
//!
//! ELMA (log): the product is an exact fixed-point add of the two `m.f`
//! payloads; the `p` table then approximates the product's fraction as a
//! linear significand (`1 + r(p(f))`), which accumulates exactly. The table
//! lookup is the one extra rounding EMA does not have.

use crate::decoded::Decoded;
use crate::error::{Error, Result};
use crate::format::FormatConfig;
use crate::kulisch::{bias_input, KulischAccumulator, KulischConfig};
use crate::lns::{self, PqTables};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ema,
    Elma,
}

/// A format paired with its accumulator geometry, lookup tables (log only),
/// decode table, and exponent biases.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    format: FormatConfig,
    kulisch: KulischConfig,
    tables: Option<PqTables>,
    decoded: Vec<Option<Decoded>>,
    bias_m: i32,
    bias_n: i32,
}

impl EngineConfig {
    pub fn new(format: FormatConfig) -> Result<Self> {
        let tables = match &format {
            FormatConfig::Posit(_) => None,
            FormatConfig::Log(l) => Some(lns::build_tables(l)?),
        };
        let decoded = (0..1u32 << format.word_bits())
            .map(|p| format.decode(p as u16).ok())
            .collect();
        Ok(EngineConfig {
            kulisch: KulischConfig::for_format(&format),
            format,
            tables,
            decoded,
            bias_m: 0,
            bias_n: 0,
        })
    }

    pub fn with_bias(mut self, bias_m: i32, bias_n: i32) -> Self {
        self.bias_m = bias_m;
        self.bias_n = bias_n;
        self
    }

    pub fn format(&self) -> &FormatConfig {
        &self.format
    }

    pub fn kulisch(&self) -> &KulischConfig {
        &self.kulisch
    }

    pub fn tables(&self) -> Option<&PqTables> {
        self.tables.as_ref()
    }

    pub fn bias_m(&self) -> i32 {
        self.bias_m
    }

    pub fn bias_n(&self) -> i32 {
        self.bias_n
    }

    /// The mode this format's family supports.
    pub fn natural_mode(&self) -> Mode {
        match self.format {
            FormatConfig::Posit(_) => Mode::Ema,
            FormatConfig::Log(_) => Mode::Elma,
        }
    }

    pub fn new_accumulator(&self) -> KulischAccumulator {
        KulischAccumulator::new(self.kulisch)
    }

    /// Table-backed decode of a word.
    pub fn decode(&self, bits: u16) -> Result<Decoded> {
        self.decoded[(bits & self.format.pattern_mask()) as usize]
            .ok_or(Error::Unsupported("pattern has no value in this format"))
    }

    fn check_mode(&self, mode: Mode) -> Result<()> {
        if mode != self.natural_mode() {
            return Err(Error::Config(format!(
                "{} mode does not apply to {}",
                match mode {
                    Mode::Ema => "EMA",
                    Mode::Elma => "ELMA",
                },
                self.format
            )));
        }
        Ok(())
    }
}

/// One scalar product, ready for accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Product {
    Zero,
    /// Overwhelms any accumulator; posit infinity carries no sign.
    Infinite { negative: bool },
    /// `sign * significand * 2^scale_exp`, exact.
    Finite {
        negative: bool,
        significand: u64,
        scale_exp: i64,
    },
}

fn special_product(a: &Decoded, b: &Decoded) -> Result<Option<Product>> {
    match (a, b) {
        (Decoded::Zero, Decoded::Infinity { .. }) | (Decoded::Infinity { .. }, Decoded::Zero) => {
            Err(Error::InvalidOperation("zero times infinity"))
        }
        (Decoded::Zero, _) | (_, Decoded::Zero) => Ok(Some(Product::Zero)),
        (Decoded::Infinity { negative: na }, Decoded::Infinity { negative: nb }) => {
            Ok(Some(Product::Infinite {
                negative: na ^ nb,
            }))
        }
        (Decoded::Infinity { negative: na }, Decoded::Normal { negative: nb, .. })
        | (Decoded::Normal { negative: na, .. }, Decoded::Infinity { negative: nb }) => {
            Ok(Some(Product::Infinite {
                negative: na ^ nb,
            }))
        }
        _ => Ok(None),
    }
}

/// Exact product of two linear posit words: integer significand multiply,
/// exponent add, no rounding.
pub fn ema_product(a_bits: u16, b_bits: u16, cfg: &EngineConfig) -> Result<Product> {
    cfg.check_mode(Mode::Ema)?;
    let a = cfg.decode(a_bits)?;
    let b = cfg.decode(b_bits)?;
    if let Some(p) = special_product(&a, &b)? {
        return Ok(p);
    }
    let (na, sig_a, ea) = a.to_parts().unwrap();
    let (nb, sig_b, eb) = b.to_parts().unwrap();
    Ok(Product::Finite {
        negative: na ^ nb,
        significand: sig_a * sig_b,
        scale_exp: ea + eb,
    })
}

/// Log product linearized for accumulation: exact `m.f` add, then the
/// `1 + r(p(f), alpha)` significand at scale `2^(m - alpha)`.
pub fn elma_product(a_bits: u16, b_bits: u16, cfg: &EngineConfig) -> Result<Product> {
    cfg.check_mode(Mode::Elma)?;
    let FormatConfig::Log(lcfg) = cfg.format else {
        unreachable!()
    };
    let a = cfg.decode(a_bits)?;
    let b = cfg.decode(b_bits)?;
    let prod = lns::log_multiply(&a, &b, &lcfg)?;
    match prod {
        Decoded::Zero => Ok(Product::Zero),
        Decoded::Infinity { negative } => Ok(Product::Infinite { negative }),
        normal => {
            let tables = cfg.tables().expect("log engine has tables");
            let (negative, m, significand) = lns::log_to_linear(&normal, tables)?;
            Ok(Product::Finite {
                negative,
                significand,
                scale_exp: m - tables.alpha as i64,
            })
        }
    }
}

fn product(a_bits: u16, b_bits: u16, cfg: &EngineConfig, mode: Mode) -> Result<Product> {
    match mode {
        Mode::Ema => ema_product(a_bits, b_bits, cfg),
        Mode::Elma => elma_product(a_bits, b_bits, cfg),
    }
}

/// Runs the multiply-accumulate loop and returns the raw accumulator, so
/// callers can inspect the truncation/overflow flags before conversion.
pub fn dot_accumulate(
    a: &[u16],
    b: &[u16],
    cfg: &EngineConfig,
    mode: Mode,
) -> Result<KulischAccumulator> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    cfg.check_mode(mode)?;
    let mut acc = cfg.new_accumulator();
    for (&x, &y) in a.iter().zip(b) {
        match product(x, y, cfg, mode)? {
            Product::Zero => {}
            Product::Infinite { negative } => {
                // No register holds it; surface as an immediate saturation.
                return Err(Error::Saturated { negative });
            }
            Product::Finite {
                negative,
                significand,
                scale_exp,
            } => acc.accumulate(negative, significand, bias_input(scale_exp, cfg.bias_m)),
        }
    }
    Ok(acc)
}

/// `r(sum_i a_i * b_i)`: one Kulisch accumulation, one rounding.
pub fn dot(a: &[u16], b: &[u16], cfg: &EngineConfig, mode: Mode) -> Result<u16> {
    dot_accumulate(a, b, cfg, mode)?.to_encoded(&cfg.format, cfg.tables(), cfg.bias_n)
}
