//! Dynamic feature selection tracking.
//!
//! A kernelized correlation-filter tracker over luminance and color-name
//! features. Each frame the color-name channels are ranked by how well they
//! separate target from immediate background (Fisher score, t-test, Pearson
//! correlation fused into a rank-one graph scored by infinite path sums),
//! the top-ranked channels feed an adaptive PCA projection, and an online
//! sparse dictionary picks the best-fitting box size.

pub mod cft;
pub mod error;
pub mod featselect;
pub mod harness;
pub mod imaging;
pub mod scale;

pub use cft::{Tracker, TrackerConfig};
pub use error::{Error, Result};
pub use imaging::{BoundingBox, CnTable, FeatureMap, Image};
