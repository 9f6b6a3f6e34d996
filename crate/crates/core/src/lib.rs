//! Numerical core for a tiny 1D-CNN that classifies indoor activities from
//! six gas-sensor readings.
//!
//! The crate is `no_std` (it needs `alloc`) so the same inference and
//! training code can run on a microcontroller-class target. File IO, the
//! command line and the streaming service live in the `aqnn` crate.
//!
//! Layout:
//! - [`nn`]: layers, fused softmax/cross-entropy, Adam, initialization and
//!   finite-difference gradient checking.
//! - [`data`]: sensor samples, normalization, seeded splits and a synthetic
//!   dataset generator.
//! - [`train`]: mini-batch training with best-validation checkpointing.
//! - [`metrics`]: confusion matrix and classification report.
//! - [`codec`]: the versioned binary model format.
//! - [`baselines`]: KNN and plain MLP reference classifiers.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod codec;
pub mod data;
mod error;
pub mod metrics;
pub mod nn;
pub mod train;

pub use error::{Error, Result};

/// Number of sensor channels in one observation.
pub const NUM_SENSORS: usize = 6;

/// Number of activity classes.
pub const NUM_CLASSES: usize = 4;
