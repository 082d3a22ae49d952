//! File formats and the command line for `dsom-core`.
//!
//! - [`idx`]: MNIST-style IDX reading and writing.
//! - [`pgm`]: binary greyscale images.
//! - [`text`]: six-significant-digit CSV.
//! - [`manifest`]: the JSON sidecar written next to every run.
//! - [`config`]: `key = value` defaults files.
//! - [`data`]: IDX and synthetic data sources.
//! - [`cli`]: argument parsing and the subcommands.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod data;
pub mod idx;
pub mod manifest;
pub mod pgm;
pub mod text;
