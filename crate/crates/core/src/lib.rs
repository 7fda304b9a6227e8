//! Benchmark workbench for waste image classification.
//!
//! Three feature routes feed one set of classical learners:
//!
//! * handcrafted descriptors (color, shape, texture, keypoint and GIST
//!   blocks, 1305 values per image) computed after GrabCut segmentation,
//! * pooled deep features ingested from `FMX1` files or CSV exports,
//! * either of the above reduced by embedded or wrapper feature selection.
//!
//! [`bench`] wires these together into experiment grids with metrics and
//! timing decomposition.

pub mod bench;
pub mod classifiers;
pub mod dataset;
pub mod deepfeat;
pub mod error;
pub mod handcrafted;
pub mod matrix;
pub mod metrics;
pub mod raster;
pub mod rng;
pub mod segmentation;
pub mod select;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use raster::ImageBuffer;
