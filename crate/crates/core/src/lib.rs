//! Diffusion self-organizing map (D-SOM) on the unit hypersphere.
//!
//! Everything in this crate is pure computation over in-memory matrices and
//! builds without `std` (only `alloc` is required). File formats, the CLI and
//! wall-clock timing live in the companion `dsom` crate.
//!
//! The pieces:
//! - [`linalg`]: the dense row-major `f32` matrix core and its hot products.
//! - [`kernel`]: the clamped-source diffusion kernel on an `L x L` torus.
//! - [`trainer`]: the batch D-SOM loop, its annealing schedule, and the
//!   independently coded spherical K-means used to cross-check it.
//! - [`baseline`]: classical online and batch SOM with a Gaussian neighborhood.
//! - [`dataset`]: sphere normalization and synthetic data.
//! - [`classify`]: neuron labeling and nearest-correlation prediction.
//! - [`viz`]: correlation maps, class masks and neuron montages.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baseline;
pub mod classify;
pub mod dataset;
pub mod kernel;
pub mod linalg;
pub mod rng;
pub mod trainer;
pub mod viz;

pub use classify::{accuracy, label_neurons, predict, LabelStrategy, NeuronLabels};
pub use dataset::{normalize_dataset, synthetic_blobs, Dataset, Label};
pub use kernel::{compute_kernel, winner_to_grid, DiffusionKernel, GridCoord};
pub use linalg::{argmax_rows, matmul_nt, matmul_tn, mean_alignment_error, normalize_rows, IndexVector, Matrix};
pub use trainer::{dsom_epoch, init_codebook, spherical_kmeans, train, Codebook, InitStrategy, TrainConfig, TrainHistory};
