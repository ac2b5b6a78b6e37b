//! Sound texture analysis on a calibrated gammachirp cochleagram.
//!
//! The pipeline turns a mono signal into a log-energy cochleagram, calibrates
//! correlation distances on white noise, derives oriented center-surround
//! ratios and tract features, and collapses them into per-file pulsality,
//! tonality and noisiness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod calibration;
pub mod descriptors;
pub mod error;
pub mod exec;
pub mod export;
pub mod filterbank;
pub mod pipeline;
pub mod signal_io;
pub mod texture;

pub use error::{Error, Result};
pub use exec::Execution;
pub use pipeline::{Pipeline, RunConfig};
