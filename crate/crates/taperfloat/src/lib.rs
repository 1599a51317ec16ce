//! Bit-exact tapered posit and base-2 log floating point with exact
//! (Kulisch) fixed-point accumulation.
//!
//! The crate provides:
//!
//! - [`posit`]: `(N, s)` posit encode/decode with Golomb-Rice regimes.
//! - [`lns`]: `(N, s, alpha, beta, gamma)` posit-tapered and IEEE-style log
//!   formats, their `p`/`q` lookup tables, and log-domain multiply/divide.
//! - [`kulisch`]: the wide fixed-point accumulator with range restriction,
//!   exact merge, integer divide (average pooling), and exponent biasing.
//! - [`mac`]: EMA (exact multiply-add) and ELMA (exact log-linear
//!   multiply-add) dot-product engines.
//! - [`linalg`]: encoded matrices, reference GEMM, average pooling, and the
//!   text/binary matrix file formats.
//! - [`systolic`]: a cycle-stepped stationary-C systolic array simulator
//!   that is bit-identical to the reference GEMM.
//! - [`oracle`]: exact dyadic arithmetic and reference roundings used as
//!   ground truth by the test suites.

pub mod decimal;
pub mod decoded;
pub mod dyadic;
pub mod error;
pub mod format;
pub mod interval;
pub mod kulisch;
pub mod linalg;
pub mod lns;
pub mod mac;
pub mod oracle;
pub mod posit;
pub mod systolic;
pub mod verify;

pub use decoded::Decoded;
pub use dyadic::DyadicValue;
pub use error::{Error, Result};
pub use format::FormatConfig;
