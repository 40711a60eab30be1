//! Center-symmetric local binary/trinary pattern features for pedestrian
//! detection.
//!
//! The crate is organized bottom-up:
//!
//! - [`image`]: normalized grayscale images, bilinear sampling, gradients
//! - [`patterns`]: LBP, LTP, CS-LBP and CS-LTP per-pixel operators
//! - [`dense`]: the dense CS-LBP block/cell window descriptor
//! - [`pyramid`]: pyramid CS-LBP/LTP edge-energy descriptors
//! - [`svm`]: linear and histogram-intersection-kernel SVMs with an SMO trainer
//! - [`detect`]: multiscale sliding-window detection, NMS, hard-negative mining
//! - [`eval`]: dataset loading, PASCAL matching, FPPI and ROC curves
//! - [`sweep`]: dense-descriptor parameter sweeps on per-window ROC
//! - [`synth`]: a seeded synthetic pedestrian-like corpus for desk-scale runs
//! - [`training`]: detector training with hard-negative mining
//! - [`manifest`]: JSON run manifests written next to outputs
//! - [`cli`]: the `cslbp` command-line front end

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dense;
pub mod detect;
pub mod error;
pub mod eval;
pub mod features;
pub mod image;
pub mod manifest;
pub mod patterns;
pub mod pyramid;
pub mod svm;
pub mod sweep;
pub mod synth;
pub mod training;

pub use crate::error::{Error, Result};
pub use crate::image::GrayImage;

/// Detection window width in pixels.
pub const WINDOW_WIDTH: usize = 64;
/// Detection window height in pixels.
pub const WINDOW_HEIGHT: usize = 128;
