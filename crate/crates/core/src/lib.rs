//! Video text tracking and spotting toolkit.
//!
//! - [`geometry`]: rotated boxes, quads, convex clipping, IoU and GIoU.
//! - [`matching`]: Kuhn–Munkres solver, set-matching cost and set loss for
//!   rotated-box predictions.
//! - [`tracker`]: frame-by-frame IoU association of detections and track
//!   boxes.
//! - [`linker`]: greedy IoU + edit-distance trajectory linking for
//!   image-level detectors.
//! - [`annotations`]: data model, JSON I/O, keyframe sampling and linear
//!   interpolation.
//! - [`metrics`]: detection P/R/F, CLEAR-MOT, identity and spotting metrics.
//! - [`synth`]: deterministic synthetic videos for end-to-end checks.

pub mod annotations;
pub mod exec;
pub mod geometry;
pub mod linker;
pub mod matching;
pub mod metrics;
pub mod synth;
pub mod tracker;

pub use exec::Execution;
