//! Minimum-error-entropy (MEE) deep regression from strongly mixing data.
//!
//! The crate is organised bottom-up:
//!
//! * [`density`]: the Subbotin noise family, truncation, Parzen estimates and
//!   the entropy diagnostics used to check the theory numerically.
//! * [`network`], [`capacity`], [`checkpoint`]: a small ReLU network engine
//!   with exact reverse-mode gradients, the architecture prescriptions that
//!   drive the convergence-rate results, and the on-disk model format.
//! * [`penalty`]: the clipped-L1 sparse penalty and the hard sparsity projection.
//! * [`data`]: generators for mixing regression / autoregression series.
//! * [`train`]: the sparsity-constrained (NPDNN), sparse-penalized (SPDNN),
//!   kernel-MEE and least-squares estimators.
//! * [`harness`]: excess-risk Monte Carlo, rate studies and robustness comparisons.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod checkpoint;
pub mod data;
pub mod density;
mod error;
pub mod harness;
pub mod network;
pub mod penalty;
pub mod quadrature;
pub mod report;
pub mod train;

pub use error::{MeeError, Result};

/// Crate version recorded in every result file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
