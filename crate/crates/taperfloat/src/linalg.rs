//! Encoded matrices, the reference GEMM, and average pooling.
//!
//! GEMM computes each output element as one engine dot product (a single
//! Kulisch accumulation with one rounding), which is the functional
//! semantics the systolic simulator must reproduce bit for bit.

use std::io::{Read, Write};

use crate::decimal::parse_decimal;
use crate::decoded::Decoded;
use crate::error::{Error, Result};
use crate::format::FormatConfig;
use crate::kulisch::bias_input;
use crate::mac::{dot, EngineConfig, Mode, Product};
use crate::posit;

/// A row-major matrix of encoded words in one format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedMatrix {
    rows: usize,
    cols: usize,
    format: FormatConfig,
    data: Vec<u16>,
}

impl EncodedMatrix {
    pub fn new(rows: usize, cols: usize, format: FormatConfig, data: Vec<u16>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                left: (rows, cols),
                right: (1, data.len()),
            });
        }
        for &bits in &data {
            format.decode(bits)?;
        }
        Ok(EncodedMatrix {
            rows,
            cols,
            format,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize, format: FormatConfig) -> Self {
        EncodedMatrix {
            rows,
            cols,
            format,
            data: vec![format.zero_pattern(); rows * cols],
        }
    }

    /// Encodes a row-major `f64` slice.
    pub fn from_f64s(rows: usize, cols: usize, values: &[f64], format: FormatConfig) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                left: (rows, cols),
                right: (1, values.len()),
            });
        }
        let data = match format {
            FormatConfig::Posit(p) => {
                let table = posit::EncodeTable::new(p)?;
                values
                    .iter()
                    .map(|&v| table.encode_f64(v))
                    .collect::<Result<Vec<u16>>>()?
            }
            _ => values
                .iter()
                .map(|&v| format.encode_f64(v))
                .collect::<Result<Vec<u16>>>()?,
        };
        Ok(EncodedMatrix {
            rows,
            cols,
            format,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn format(&self) -> &FormatConfig {
        &self.format
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, bits: u16) {
        self.data[i * self.cols + j] = bits;
    }

    pub fn row(&self, i: usize) -> &[u16] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Approximate values, for error reports.
    pub fn to_f64s(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|&bits| self.format.approx_f64(&self.format.decode(bits).unwrap()))
            .collect()
    }
}

/// GEMM result plus the positions (and signs) of saturated elements.
#[derive(Debug, Clone)]
pub struct GemmOutput {
    pub matrix: EncodedMatrix,
    pub saturated: Vec<(usize, usize, bool)>,
}

/// `C[i][j] = r(sum_k A[i][k] * B[k][j])`, one rounding per element.
///
/// A saturated element is reported and carries the signed `f_max` pattern
/// rather than failing the whole product.
pub fn gemm(
    a: &EncodedMatrix,
    b: &EncodedMatrix,
    cfg: &EngineConfig,
    mode: Mode,
) -> Result<GemmOutput> {
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch {
            left: (a.rows, a.cols),
            right: (b.rows, b.cols),
        });
    }
    if a.format != *cfg.format() || b.format != *cfg.format() {
        return Err(Error::Config("matrix format does not match engine".into()));
    }
    // Column gather once; dot works on contiguous slices.
    let mut b_t = vec![0u16; b.rows * b.cols];
    for i in 0..b.rows {
        for j in 0..b.cols {
            b_t[j * b.rows + i] = b.get(i, j);
        }
    }
    let mut out = EncodedMatrix::zeros(a.rows, b.cols, *cfg.format());
    let mut saturated = Vec::new();
    for i in 0..a.rows {
        for j in 0..b.cols {
            let col = &b_t[j * b.rows..(j + 1) * b.rows];
            match dot(a.row(i), col, cfg, mode) {
                Ok(bits) => out.set(i, j, bits),
                Err(Error::Saturated { negative }) => {
                    let mut bits = cfg.format().f_max_pattern();
                    if negative {
                        bits = cfg.format().negate_pattern(bits);
                    }
                    out.set(i, j, bits);
                    saturated.push((i, j, negative));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(GemmOutput {
        matrix: out,
        saturated,
    })
}

/// Mean of the values through the accumulator: sum exactly, divide the
/// register by the count (round-to-nearest-even at the register LSB),
/// convert once.
pub fn average_pool(values: &[u16], cfg: &EngineConfig) -> Result<u16> {
    if values.is_empty() {
        return Err(Error::InvalidOperation("average of an empty pool"));
    }
    let mut acc = cfg.new_accumulator();
    for &bits in values {
        let d = cfg.decode(bits)?;
        let product = match cfg.format() {
            FormatConfig::Posit(_) => match d.to_parts() {
                Some((negative, significand, scale_exp)) => Product::Finite {
                    negative,
                    significand,
                    scale_exp,
                },
                None if d.is_zero() => Product::Zero,
                None => return Err(Error::Saturated { negative: false }),
            },
            FormatConfig::Log(_) => {
                if d.is_zero() {
                    Product::Zero
                } else if let Decoded::Infinity { negative } = d {
                    return Err(Error::Saturated { negative });
                } else {
                    let tables = cfg.tables().expect("log engine has tables");
                    let (negative, m, significand) = crate::lns::log_to_linear(&d, tables)?;
                    Product::Finite {
                        negative,
                        significand,
                        scale_exp: m - tables.alpha as i64,
                    }
                }
            }
        };
        if let Product::Finite {
            negative,
            significand,
            scale_exp,
        } = product
        {
            acc.accumulate(negative, significand, bias_input(scale_exp, cfg.bias_m()));
        }
    }
    acc.divide_by_uint(values.len() as u64)?;
    acc.to_encoded(cfg.format(), cfg.tables(), cfg.bias_n())
}

const MAGIC: &[u8; 4] = b"KLF1";

/// Writes the binary matrix format: magic `KLF1`, LE u32 rows/cols,
/// length-prefixed format descriptor, then row-major elements (1 byte per
/// element for words up to 8 bits, 2 bytes LE up to 16).
pub fn write_binary(m: &EncodedMatrix, w: &mut impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows as u32).to_le_bytes())?;
    w.write_all(&(m.cols as u32).to_le_bytes())?;
    let desc = m.format.to_string();
    w.write_all(&(desc.len() as u32).to_le_bytes())?;
    w.write_all(desc.as_bytes())?;
    match m.format.element_bytes() {
        1 => {
            for &bits in &m.data {
                w.write_all(&[bits as u8])?;
            }
        }
        _ => {
            for &bits in &m.data {
                w.write_all(&bits.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_binary(r: &mut impl Read) -> Result<EncodedMatrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("missing KLF1 magic".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let rows = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let desc_len = u32::from_le_bytes(word) as usize;
    if desc_len > 64 {
        return Err(Error::Parse("format descriptor implausibly long".into()));
    }
    let mut desc = vec![0u8; desc_len];
    r.read_exact(&mut desc)?;
    let desc = String::from_utf8(desc).map_err(|_| Error::Parse("bad descriptor bytes".into()))?;
    let format: FormatConfig = desc.parse()?;
    let count = rows
        .checked_mul(cols)
        .filter(|&c| c <= 1 << 28)
        .ok_or_else(|| Error::Parse("matrix dimensions overflow".into()))?;
    let mut data = Vec::with_capacity(count);
    match format.element_bytes() {
        1 => {
            let mut buf = vec![0u8; count];
            r.read_exact(&mut buf)?;
            data.extend(buf.into_iter().map(u16::from));
        }
        _ => {
            let mut buf = vec![0u8; count * 2];
            r.read_exact(&mut buf)?;
            data.extend(
                buf.chunks_exact(2)
                    .map(|c| u16::from_le_bytes([c[0], c[1]])),
            );
        }
    }
    EncodedMatrix::new(rows, cols, format, data)
}

/// Parses the text matrix format: a `rows cols` header line, then rows of
/// space-separated decimal values, each encoded by round-to-nearest.
pub fn read_text(text: &str, format: FormatConfig) -> Result<EncodedMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::Parse(format!(
            "expected 'rows cols' header, got {header:?}"
        )));
    }
    let rows: usize = dims[0]
        .parse()
        .map_err(|_| Error::Parse(format!("bad row count {:?}", dims[0])))?;
    let cols: usize = dims[1]
        .parse()
        .map_err(|_| Error::Parse(format!("bad column count {:?}", dims[1])))?;
    let mut data = Vec::with_capacity(rows * cols);
    for line in lines {
        for tok in line.split_whitespace() {
            let r = parse_decimal(tok)?;
            data.push(format.encode_rational(&r)?);
        }
    }
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} values, found {}",
            rows * cols,
            data.len()
        )));
    }
    EncodedMatrix::new(rows, cols, format, data)
}

/// Reads either matrix file flavor: binary when the magic matches, text
/// otherwise (text requires the target format).
pub fn read_matrix(bytes: &[u8], format: FormatConfig) -> Result<EncodedMatrix> {
    if bytes.starts_with(MAGIC) {
        let m = read_binary(&mut &bytes[..])?;
        if *m.format() != format {
            return Err(Error::Config(format!(
                "file holds {} but {} was requested",
                m.format(),
                format
            )));
        }
        return Ok(m);
    }
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::Parse("matrix file is neither KLF1 nor text".into()))?;
    read_text(text, format)
}
