//! Baseline detection from pixel confidence maps.
//!
//! The pipeline takes a baseline map `B` and a separator map `S` (the output
//! of a pixel labeler, or oracle maps rendered from ground truth) and turns
//! them into polygonal baselines:
//!
//! 1. [`superpixels`]: binarize `B`, skeletonize, pick a sparse set of
//!    superpixels ordered by confidence.
//! 2. [`state`]: Delaunay neighborhood, local text orientation per
//!    superpixel, and interline distances from projection-profile spectra
//!    smoothed by an α-β-swap graph cut.
//! 3. [`cluster`]: prune the neighborhood, greedily cluster superpixels under
//!    curvilinearity and separation constraints, and emit one chain per
//!    cluster.
//!
//! [`groundtruth`] builds pixel ground truth and synthetic pages, and
//! [`evaluation`] scores detections against known baselines.

pub mod audit;
pub mod cluster;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod groundtruth;
pub mod image;
pub mod morphology;
pub mod pipeline;
mod spatial;
pub mod state;
pub mod superpixels;

pub use config::{ConnectivityMode, PipelineConfig};
pub use error::{Error, Result};
pub use geometry::{Point, PolyChain, Region};
pub use image::{BinaryImage, ConfidenceMaps, GrayImage};
pub use pipeline::{detect_baselines, Detection};
