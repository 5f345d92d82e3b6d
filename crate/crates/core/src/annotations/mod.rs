//! Ground truth, detections and trajectories: data model, JSON I/O, and the
//! sample-then-interpolate annotation pipeline.

mod interpolate;
mod io;
mod model;

use thiserror::Error;

pub use interpolate::{interpolate, sample, SampledAnnotation};
pub use io::{
    annotation_to_string, load_annotation, load_detections, read_annotation, read_detections,
    save_annotation, save_detections, save_trajectories, write_annotation, write_detections,
};
pub use model::{
    Detection, DetectionSet, FrameDetections, Instance, TextCategory, Trajectory, TrajectoryPoint,
    VideoAnnotation, VideoMeta, IGNORE_TRANSCRIPTION,
};

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("track id {track_id} appears twice in frame {frame}")]
    DuplicateTrackIdInFrame { frame: usize, track_id: u64 },
    #[error("frame index {frame} outside 0..{frame_count}")]
    OutOfRangeFrameIndex { frame: usize, frame_count: usize },
    #[error("track {track_id}: corner order changes between frames {from} and {to}")]
    CornerCorrespondence { track_id: u64, from: usize, to: usize },
    #[error("sampling step must be at least 1, got {0}")]
    InvalidSamplingStep(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AnnotationError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema { path: path.into(), message: message.into() }
    }
}
