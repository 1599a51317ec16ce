//! Cycle-stepped stationary-C systolic array.
//!
//! Operands enter skewed along the west (A) and north (B) edges through
//! boundary decoders, one multiply-accumulate lands in each PE's resident
//! Kulisch register per cycle, and finished accumulators drain column-wise
//! through a rationed pool of output converters. The functional result is
//! bit-identical to the reference GEMM; the cycle count and activity
//! counters quantify the dataflow (conversions happen once per output
//! element, however long the inner dimension).
//!
//! Schedule: operand `A[i][k]` enters row `i` at cycle `k + i` and meets
//! `B[k][j]` in PE `(i, j)` at cycle `k + i + j`; compute thus takes
//! `K + M + N - 2` cycles, and draining adds `ceil(N / converters) * M`.

use crate::decoded::Decoded;
use crate::error::{Error, Result};
use crate::kulisch::{bias_input, KulischAccumulator};
use crate::linalg::EncodedMatrix;
use crate::lns;
use crate::mac::{EngineConfig, Mode, Product};
use crate::format::FormatConfig;

/// Physical array shape and resource counts.
#[derive(Debug, Clone)]
pub struct ArrayConfig {
    rows: usize,
    cols: usize,
    engine: EngineConfig,
    n_output_converters: usize,
    n_boundary_decoders: usize,
}

impl ArrayConfig {
    /// The 32x32 array with 32 output converters and 64 boundary decoders.
    pub fn new(engine: EngineConfig) -> Self {
        ArrayConfig {
            rows: 32,
            cols: 32,
            engine,
            n_output_converters: 32,
            n_boundary_decoders: 64,
        }
    }

    pub fn with_dims(mut self, rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        self.rows = rows;
        self.cols = cols;
        self
    }

    pub fn with_output_converters(mut self, n: usize) -> Self {
        assert!(n >= 1);
        self.n_output_converters = n;
        self
    }

    pub fn engine(&self) -> &EngineConfig {
        &self.engine
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_output_converters(&self) -> usize {
        self.n_output_converters
    }

    pub fn n_boundary_decoders(&self) -> usize {
        self.n_boundary_decoders
    }
}

/// Event counts from one run, one per hardware component class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ActivityReport {
    pub multiplies: u64,
    pub shifts: u64,
    pub wide_adds: u64,
    pub conversions: u64,
    pub decoder_invocations: u64,
}

/// A finished run: result, flags, timing, and activity.
#[derive(Debug, Clone)]
pub struct SystolicRun {
    pub result: EncodedMatrix,
    pub saturated: Vec<(usize, usize, bool)>,
    pub cycles: u64,
    pub activity: ActivityReport,
}

impl SystolicRun {
    pub fn activity_report(&self) -> &ActivityReport {
        &self.activity
    }
}

/// One processing element: the stationary accumulator plus operand latches.
struct PeState {
    accumulator: KulischAccumulator,
    a_reg: Option<Decoded>,
    b_reg: Option<Decoded>,
    /// Set when an infinite product hit this PE; carries the product sign.
    poisoned: Option<bool>,
}

/// Streams a GEMM through the array and returns the drained result.
pub fn run_gemm(a: &EncodedMatrix, b: &EncodedMatrix, cfg: &ArrayConfig) -> Result<SystolicRun> {
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    if b.rows() != k {
        return Err(Error::ShapeMismatch {
            left: (m, k),
            right: (b.rows(), n),
        });
    }
    if m == 0 || k == 0 || n == 0 {
        return Err(Error::Config("array streaming needs nonempty operands".into()));
    }
    if m > cfg.rows || n > cfg.cols {
        return Err(Error::Config(format!(
            "{m}x{n} output exceeds the {}x{} array",
            cfg.rows, cfg.cols
        )));
    }
    let engine = &cfg.engine;
    if a.format() != engine.format() || b.format() != engine.format() {
        return Err(Error::Config("matrix format does not match engine".into()));
    }
    let mode = engine.natural_mode();
    let lcfg = match engine.format() {
        FormatConfig::Log(l) => Some(*l),
        FormatConfig::Posit(_) => None,
    };

    let mut pes: Vec<PeState> = (0..m * n)
        .map(|_| PeState {
            accumulator: engine.new_accumulator(),
            a_reg: None,
            b_reg: None,
            poisoned: None,
        })
        .collect();
    let mut activity = ActivityReport::default();

    // Compute phase: operands ripple east/south one PE per cycle.
    let compute_cycles = (k + m + n - 2) as u64;
    for t in 0..compute_cycles as usize {
        // Shift east/south from the previous cycle's latches, bottom-right
        // first so values move exactly one step.
        for i in (0..m).rev() {
            for j in (0..n).rev() {
                let a_in = if j == 0 {
                    // West boundary decoder for row i.
                    t.checked_sub(i)
                        .filter(|&kk| kk < k)
                        .map(|kk| {
                            activity.decoder_invocations += 1;
                            engine.decode(a.get(i, kk))
                        })
                        .transpose()?
                } else {
                    pes[i * n + (j - 1)].a_reg
                };
                let b_in = if i == 0 {
                    // North boundary decoder for column j.
                    t.checked_sub(j)
                        .filter(|&kk| kk < k)
                        .map(|kk| {
                            activity.decoder_invocations += 1;
                            engine.decode(b.get(kk, j))
                        })
                        .transpose()?
                } else {
                    pes[(i - 1) * n + j].b_reg
                };
                let pe = &mut pes[i * n + j];
                pe.a_reg = a_in;
                pe.b_reg = b_in;
            }
        }
        // Every PE with a full operand pair performs one MAC.
        for pe in pes.iter_mut() {
            let (Some(da), Some(db)) = (pe.a_reg, pe.b_reg) else {
                continue;
            };
            activity.multiplies += 1;
            activity.shifts += 1;
            activity.wide_adds += 1;
            let product = match mode {
                Mode::Ema => linear_product(&da, &db)?,
                Mode::Elma => {
                    let lcfg = lcfg.as_ref().unwrap();
                    let prod = lns::log_multiply(&da, &db, lcfg)?;
                    match prod {
                        Decoded::Zero => Product::Zero,
                        Decoded::Infinity { negative } => Product::Infinite { negative },
                        normal => {
                            let tables = engine.tables().unwrap();
                            let (negative, mm, significand) =
                                lns::log_to_linear(&normal, tables)?;
                            Product::Finite {
                                negative,
                                significand,
                                scale_exp: mm - tables.alpha as i64,
                            }
                        }
                    }
                }
            };
            match product {
                Product::Zero => {}
                Product::Infinite { negative } => pe.poisoned = Some(negative),
                Product::Finite {
                    negative,
                    significand,
                    scale_exp,
                } => pe.accumulator.accumulate(
                    negative,
                    significand,
                    bias_input(scale_exp, engine.bias_m()),
                ),
            }
        }
    }

    // Drain phase: accumulators shift out column-wise; each pass serves one
    // group of `n_output_converters` columns and takes M cycles.
    let groups = n.div_ceil(cfg.n_output_converters);
    let drain_cycles = (groups * m) as u64;
    let mut result = EncodedMatrix::zeros(m, n, *engine.format());
    let mut saturated = Vec::new();
    for g in 0..groups {
        let cols = (g * cfg.n_output_converters)..((g + 1) * cfg.n_output_converters).min(n);
        for step in 0..m {
            let i = m - 1 - step; // bottom row leaves first
            for j in cols.clone() {
                let pe = &pes[i * n + j];
                activity.conversions += 1;
                let outcome = match pe.poisoned {
                    Some(negative) => Err(Error::Saturated { negative }),
                    None => {
                        pe.accumulator
                            .to_encoded(engine.format(), engine.tables(), engine.bias_n())
                    }
                };
                match outcome {
                    Ok(bits) => result.set(i, j, bits),
                    Err(Error::Saturated { negative }) => {
                        let mut bits = engine.format().f_max_pattern();
                        if negative {
                            bits = engine.format().negate_pattern(bits);
                        }
                        result.set(i, j, bits);
                        saturated.push((i, j, negative));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    saturated.sort_unstable();

    Ok(SystolicRun {
        result,
        saturated,
        cycles: compute_cycles + drain_cycles,
        activity,
    })
}

fn linear_product(a: &Decoded, b: &Decoded) -> Result<Product> {
    match (a, b) {
        (Decoded::Zero, Decoded::Infinity { .. }) | (Decoded::Infinity { .. }, Decoded::Zero) => {
            Err(Error::InvalidOperation("zero times infinity"))
        }
        (Decoded::Zero, _) | (_, Decoded::Zero) => Ok(Product::Zero),
        (Decoded::Infinity { negative: na }, other)
        | (other, Decoded::Infinity { negative: na }) => {
            let nb = match other {
                Decoded::Normal { negative, .. } => *negative,
                Decoded::Infinity { negative } => *negative,
                Decoded::Zero => unreachable!(),
            };
            Ok(Product::Infinite { negative: na ^ nb })
        }
        _ => {
            let (na, sa, ea) = a.to_parts().unwrap();
            let (nb, sb, eb) = b.to_parts().unwrap();
            Ok(Product::Finite {
                negative: na ^ nb,
                significand: sa * sb,
                scale_exp: ea + eb,
            })
        }
    }
}
