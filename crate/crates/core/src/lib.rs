//! Geometry, synthesis and evaluation toolkit for multi-person gaze
//! estimation from upward-facing fisheye cameras.
//!
//! * [`camera`] - equidistant and Kannala-Brandt projection models.
//! * [`reproject`] - five-view cubemap to fisheye synthesis and model-to-model remapping.
//! * [`dataset`] - scene sampling, annotation projection, manifest schema and validation.
//! * [`kernels`] - forward reference kernels: rotational convolution, dual-resolution
//!   cross-attention fusion and the multi-task loss.
//! * [`metrics`] - detection matching, angular errors, adjusted gaze error and binning.

pub mod camera;
pub mod reproject;
pub mod dataset;
pub mod kernels;
pub mod metrics;

pub use camera::{CameraModel, EquidistantCamera, FisheyeProjection, KannalaBrandtCamera, PixelCoord, UnitVector3};
