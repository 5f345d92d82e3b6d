use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AnnotationError;
use crate::geometry::{rotated_to_quad, Quad, RotatedBox};

/// Transcription marking a don't-care region.
pub const IGNORE_TRANSCRIPTION: &str = "###";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextCategory {
    Caption,
    Title,
    Scene,
    Others,
}

impl TextCategory {
    pub const ALL: [TextCategory; 4] = [Self::Caption, Self::Title, Self::Scene, Self::Others];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Caption => "caption",
            Self::Title => "title",
            Self::Scene => "scene",
            Self::Others => "others",
        }
    }
}

impl fmt::Display for TextCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TextCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown text category {s:?}"))
    }
}

/// One annotated text region in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub track_id: u64,
    pub quad: Quad,
    transcription: Option<String>,
    pub category: Option<TextCategory>,
    pub score: Option<f64>,
    ignore: bool,
}

impl Instance {
    pub fn new(
        track_id: u64,
        quad: Quad,
        transcription: Option<String>,
        category: Option<TextCategory>,
    ) -> Self {
        let ignore = transcription.as_deref() == Some(IGNORE_TRANSCRIPTION);
        Self { track_id, quad, transcription, category, score: None, ignore }
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = Some(score);
        self
    }

    pub fn transcription(&self) -> Option<&str> {
        self.transcription.as_deref()
    }

    pub fn set_transcription(&mut self, t: Option<String>) {
        self.ignore = t.as_deref() == Some(IGNORE_TRANSCRIPTION);
        self.transcription = t;
    }

    /// Don't-care region (transcription `###`).
    pub fn ignore(&self) -> bool {
        self.ignore
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub video_id: String,
    pub width: u32,
    pub height: u32,
    pub frame_count: usize,
    pub scenario: Option<String>,
}

impl VideoMeta {
    pub fn new(video_id: impl Into<String>, width: u32, height: u32, frame_count: usize) -> Self {
        Self { video_id: video_id.into(), width, height, frame_count, scenario: None }
    }

    pub(crate) fn validate(&self) -> Result<(), AnnotationError> {
        if self.frame_count == 0 {
            return Err(AnnotationError::schema("frame_count", "must be at least 1"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(AnnotationError::schema("width", "width and height must be positive"));
        }
        Ok(())
    }
}

/// Ground truth or predictions for one video. Frames without instances may
/// be absent from `frames`.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoAnnotation {
    pub meta: VideoMeta,
    frames: BTreeMap<usize, Vec<Instance>>,
}

impl VideoAnnotation {
    pub fn new(
        meta: VideoMeta,
        frames: BTreeMap<usize, Vec<Instance>>,
    ) -> Result<Self, AnnotationError> {
        meta.validate()?;
        for (&frame, instances) in &frames {
            if frame >= meta.frame_count {
                return Err(AnnotationError::OutOfRangeFrameIndex {
                    frame,
                    frame_count: meta.frame_count,
                });
            }
            let mut seen = BTreeSet::new();
            for inst in instances {
                if !seen.insert(inst.track_id) {
                    return Err(AnnotationError::DuplicateTrackIdInFrame {
                        frame,
                        track_id: inst.track_id,
                    });
                }
            }
        }
        let frames = frames.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        Ok(Self { meta, frames })
    }

    pub fn empty(meta: VideoMeta) -> Result<Self, AnnotationError> {
        Self::new(meta, BTreeMap::new())
    }

    pub fn frames(&self) -> &BTreeMap<usize, Vec<Instance>> {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &[Instance] {
        self.frames.get(&index).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn instance_count(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    pub fn track_ids(&self) -> BTreeSet<u64> {
        self.frames.values().flatten().map(|i| i.track_id).collect()
    }

    /// Groups instances by track id.
    pub fn tracks(&self) -> BTreeMap<u64, Vec<(usize, &Instance)>> {
        let mut out: BTreeMap<u64, Vec<(usize, &Instance)>> = BTreeMap::new();
        for (&f, instances) in &self.frames {
            for inst in instances {
                out.entry(inst.track_id).or_default().push((f, inst));
            }
        }
        out
    }

    /// Prediction-flavoured annotation built from tracker output.
    pub fn from_trajectories(
        meta: VideoMeta,
        trajectories: &[Trajectory],
    ) -> Result<Self, AnnotationError> {
        let mut frames: BTreeMap<usize, Vec<Instance>> = BTreeMap::new();
        for t in trajectories {
            for (&f, p) in &t.points {
                let mut inst =
                    Instance::new(t.track_id, rotated_to_quad(&p.bbox), p.transcription.clone(), p.category);
                inst.score = p.score;
                frames.entry(f).or_default().push(inst);
            }
        }
        for v in frames.values_mut() {
            v.sort_by_key(|i| i.track_id);
        }
        Self::new(meta, frames)
    }

    pub(crate) fn frames_mut(&mut self) -> &mut BTreeMap<usize, Vec<Instance>> {
        &mut self.frames
    }
}

/// One detection hypothesis in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub quad: Quad,
    pub bbox: RotatedBox,
    pub score: f64,
    pub transcription: Option<String>,
    pub category: Option<TextCategory>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameDetections {
    pub frame_index: usize,
    pub detections: Vec<Detection>,
    /// Externally predicted positions of existing tracks for this frame
    /// (the tracker's predicted-box override hook).
    pub track_boxes: BTreeMap<u64, RotatedBox>,
}

impl FrameDetections {
    pub fn new(frame_index: usize, detections: Vec<Detection>) -> Self {
        Self { frame_index, detections, track_boxes: BTreeMap::new() }
    }
}

/// A detection stream for one video, with one entry per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSet {
    pub meta: VideoMeta,
    pub frames: Vec<FrameDetections>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub bbox: RotatedBox,
    pub transcription: Option<String>,
    pub category: Option<TextCategory>,
    pub score: Option<f64>,
}

/// A track identity over time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub track_id: u64,
    pub points: BTreeMap<usize, TrajectoryPoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_frame(&self) -> Option<usize> {
        self.points.keys().next().copied()
    }

    pub fn last_frame(&self) -> Option<usize> {
        self.points.keys().next_back().copied()
    }

    /// Longest run of consecutive frames with no point.
    pub fn longest_gap(&self) -> usize {
        self.points
            .keys()
            .zip(self.points.keys().skip(1))
            .map(|(a, b)| b - a - 1)
            .max()
            .unwrap_or(0)
    }
}
