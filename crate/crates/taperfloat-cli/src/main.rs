//! `taperfloat` command-line tool.
//!
//! Formats are named by descriptor: `posit<N>es<s>`,
//! `log<N>es<s>-<alpha>-<beta>-<gamma>`, `logieee<e>e<f>-<alpha>-<beta>-<gamma>`.
//!
//! Exit codes: 0 success, 2 usage/parse error, 3 shape mismatch,
//! 4 saturation or invalid arithmetic, 5 verification failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use taperfloat::error::Error;
use taperfloat::linalg::{self, EncodedMatrix};
use taperfloat::mac::{self, EngineConfig, Mode};
use taperfloat::systolic::{run_gemm, ArrayConfig};
use taperfloat::{verify, FormatConfig};

#[derive(Parser)]
#[command(name = "taperfloat", version, about = "Tapered posit / log float codecs, exact-accumulation engines, and a systolic-array simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ema,
    Elma,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ema => Mode::Ema,
            ModeArg::Elma => Mode::Elma,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Reference,
    Systolic,
}

#[derive(Subcommand)]
enum Command {
    /// Word bits, dynamic range (dB), and max fraction bits per format.
    Tables {
        #[arg(required = true)]
        formats: Vec<String>,
    },
    /// Every bit pattern of a format with its exact value.
    Enumerate { format: String },
    /// Round a decimal value into a format.
    Convert { format: String, value: String },
    /// Dot product of two vector files (text or KLF1).
    Dot {
        format: String,
        #[arg(value_enum)]
        mode: ModeArg,
        file_a: PathBuf,
        file_b: PathBuf,
        /// Exponent bias added to each product before accumulation.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        bias_m: i32,
        /// Exponent bias applied when converting the accumulator out.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        bias_n: i32,
    },
    /// Matrix multiply through the reference engine or the systolic array.
    Gemm {
        format: String,
        #[arg(value_enum)]
        mode: ModeArg,
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, value_enum, default_value_t = EngineArg::Reference)]
        engine: EngineArg,
        /// Write the result matrix (binary KLF1) here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        bias_m: i32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        bias_n: i32,
    },
    /// Run the self-check suites for a format.
    Verify {
        format: String,
        /// Raise randomized trial counts.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 0xC0FFEE)]
        seed: u64,
    },
    /// Dump the p and q lookup tables of a log format.
    Luts { format: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Config(_) | Error::NonFinite | Error::Unsupported(_) => 2,
        Error::ShapeMismatch { .. } | Error::LengthMismatch { .. } => 3,
        Error::Saturated { .. } | Error::InvalidOperation(_) | Error::DivideByZero => 4,
        Error::ExponentOutOfRange { .. } => 2,
        Error::Io(_) => 1,
    }
}

fn parse_format(s: &str) -> Result<FormatConfig, Error> {
    s.parse()
}

fn hex_width(format: &FormatConfig) -> usize {
    format.word_bits().div_ceil(4) as usize
}

fn read_matrix_file(path: &Path, format: FormatConfig) -> Result<EncodedMatrix, Error> {
    let bytes = fs::read(path)?;
    linalg::read_matrix(&bytes, format)
}

/// Vector files are 1 x n or n x 1 matrices.
fn read_vector_file(path: &Path, format: FormatConfig) -> Result<Vec<u16>, Error> {
    let m = read_matrix_file(path, format)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(Error::ShapeMismatch {
            left: (m.rows(), m.cols()),
            right: (1, m.rows() * m.cols()),
        });
    }
    Ok(m.data().to_vec())
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Tables { formats } => {
            println!("{:<24} {:>4} {:>10} {:>9}", "format", "bits", "range(dB)", "fraction");
            for name in formats {
                let f = parse_format(&name)?;
                println!(
                    "{:<24} {:>4} {:>10.1} {:>9}",
                    f.to_string(),
                    f.word_bits(),
                    f.dynamic_range_db(),
                    f.max_fraction_bits()
                );
            }
        }
        Command::Enumerate { format } => {
            let f = parse_format(&format)?;
            let w = hex_width(&f);
            for p in 0..1u32 << f.word_bits() {
                let p = p as u16;
                let value = match f.decode(p) {
                    Ok(d) => f.value_string(&d),
                    Err(Error::Unsupported(_)) => "nan".into(),
                    Err(e) => return Err(e),
                };
                println!("{p:0w$x} {value}", w = w);
            }
        }
        Command::Convert { format, value } => {
            let f = parse_format(&format)?;
            let r = taperfloat::decimal::parse_decimal(&value)?;
            let bits = f.encode_rational(&r)?;
            let decoded = f.decode(bits)?;
            println!(
                "0x{bits:0w$X} {}",
                f.value_string(&decoded),
                w = hex_width(&f)
            );
        }
        Command::Dot {
            format,
            mode,
            file_a,
            file_b,
            bias_m,
            bias_n,
        } => {
            let f = parse_format(&format)?;
            let engine = EngineConfig::new(f)?.with_bias(bias_m, bias_n);
            let a = read_vector_file(&file_a, f)?;
            let b = read_vector_file(&file_b, f)?;
            let bits = mac::dot(&a, &b, &engine, mode.into())?;
            let decoded = f.decode(bits)?;
            println!(
                "{} 0x{bits:0w$X}",
                f.value_string(&decoded),
                w = hex_width(&f)
            );
        }
        Command::Gemm {
            format,
            mode,
            file_a,
            file_b,
            engine,
            out,
            bias_m,
            bias_n,
        } => {
            let f = parse_format(&format)?;
            let eng = EngineConfig::new(f)?.with_bias(bias_m, bias_n);
            let a = read_matrix_file(&file_a, f)?;
            let b = read_matrix_file(&file_b, f)?;
            let (matrix, saturated) = match engine {
                EngineArg::Reference => {
                    let out = linalg::gemm(&a, &b, &eng, mode.into())?;
                    (out.matrix, out.saturated)
                }
                EngineArg::Systolic => {
                    let array = ArrayConfig::new(eng.clone());
                    let run = run_gemm(&a, &b, &array)?;
                    println!("cycles {}", run.cycles);
                    let act = run.activity_report();
                    println!(
                        "activity multiplies={} shifts={} wide_adds={} conversions={} decodes={}",
                        act.multiplies,
                        act.shifts,
                        act.wide_adds,
                        act.conversions,
                        act.decoder_invocations
                    );
                    (run.result, run.saturated)
                }
            };
            println!("result {}x{}", matrix.rows(), matrix.cols());
            if saturated.is_empty() {
                println!("saturated none");
            } else {
                let spots: Vec<String> = saturated
                    .iter()
                    .map(|(i, j, neg)| format!("({i},{j},{})", if *neg { "-" } else { "+" }))
                    .collect();
                println!("saturated {} {}", saturated.len(), spots.join(" "));
            }
            if let Some(path) = out {
                let mut bytes = Vec::new();
                linalg::write_binary(&matrix, &mut bytes)?;
                fs::write(path, bytes)?;
            }
        }
        Command::Verify {
            format,
            exhaustive,
            seed,
        } => {
            let f = parse_format(&format)?;
            let checks = verify::verify_format(&f, exhaustive, seed)?;
            let mut failed = false;
            for c in &checks {
                println!(
                    "{} {} - {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                failed |= !c.passed;
            }
            if failed {
                return Ok(ExitCode::from(5));
            }
        }
        Command::Luts { format } => {
            let f = parse_format(&format)?;
            let FormatConfig::Log(lcfg) = f else {
                return Err(Error::Config(format!(
                    "{f} has no lookup tables; use a log format"
                )));
            };
            let tables = taperfloat::lns::build_tables(&lcfg)?;
            print!("{}", tables.dump());
        }
    }
    Ok(ExitCode::SUCCESS)
}
