//! Wilf-Zeilberger certificate engine and Lean 4 proof-sketch compiler.
//!
//! The pipeline runs in stages:
//!
//! 1. `parser` reads an identity `sum(k, a, b, f(n,k)) = r(n)` in a small
//!    declarative language and normalizes its summation range.
//! 2. `hyperterm` represents summands as factored hypergeometric terms and
//!    computes exact shift ratios as rational functions.
//! 3. `gosper` decides indefinite hypergeometric summability; `telescope`
//!    builds WZ pairs and higher-order creative-telescoping relations,
//!    verifying each certificate symbolically before returning it.
//! 4. `sketch` compiles the certificate into a pool of machine-checkable
//!    obligations (recurrence, boundary, side conditions, normalization,
//!    case splits) and `leanemit` renders them as a Lean 4 proof sketch
//!    plus a JSON manifest.
//! 5. `orchestrator` drives batches end to end with a dedup queue, a
//!    pluggable prover backend, and an exact numeric verification oracle.
//!
//! Everything symbolic is exact big-rational arithmetic; there is no
//! floating-point path.

pub mod error;
pub mod gosper;
pub mod hyperterm;
pub mod leanemit;
pub mod orchestrator;
pub mod parser;
pub mod sketch;
pub mod symcore;
pub mod telescope;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
