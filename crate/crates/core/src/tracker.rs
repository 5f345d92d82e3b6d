//! Frame-by-frame association of detections with track boxes.
//!
//! Each live track contributes a predicted box: an externally supplied one
//! (for instance a learned track query's output) or its last matched box.
//! Predictions and detections are matched by Kuhn–Munkres on `1 − IoU`;
//! pairs below the IoU gate cost the same as leaving both sides unmatched,
//! so the accepted matching maximises total IoU among gated matchings.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::annotations::{FrameDetections, TextCategory, Trajectory, TrajectoryPoint};
use crate::exec::Execution;
use crate::geometry::{iou, RotatedBox};
use crate::matching::{assign_rectangular, MatchingError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackError {
    #[error("frame {got} does not come after frame {previous}")]
    NonMonotonicFrame { previous: usize, got: usize },
    #[error("invalid tracker config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    pub iou_threshold: f64,
    /// Frames a track may stay unmatched before it is dropped.
    pub max_age: u32,
    pub min_score: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self { iou_threshold: 0.5, max_age: 0, min_score: 0.0 }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), TrackError> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err(TrackError::InvalidConfig(format!(
                "iou_threshold {} not in (0, 1]",
                self.iou_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.min_score) {
            return Err(TrackError::InvalidConfig(format!("min_score {} not in [0, 1]", self.min_score)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub frame_index: usize,
    pub bbox: RotatedBox,
    pub transcription: Option<String>,
    pub category: Option<TextCategory>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub track_id: u64,
    pub last_box: RotatedBox,
    pub predicted_box: RotatedBox,
    pub missed_frames: u32,
    pub history: Vec<HistoryEntry>,
}

impl TrackState {
    pub fn to_trajectory(&self) -> Trajectory {
        Trajectory {
            track_id: self.track_id,
            points: self
                .history
                .iter()
                .map(|h| {
                    (
                        h.frame_index,
                        TrajectoryPoint {
                            bbox: h.bbox,
                            transcription: h.transcription.clone(),
                            category: h.category,
                            score: Some(h.score),
                        },
                    )
                })
                .collect(),
        }
    }
}

/// What one [`Tracker::step`] changed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    /// `(track_id, detection index)` for every accepted match, by track.
    pub matches: Vec<(u64, usize)>,
    pub born: Vec<u64>,
    pub dead: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    live: Vec<TrackState>,
    finished: Vec<TrackState>,
    next_id: u64,
    last_frame: Option<usize>,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self, TrackError> {
        cfg.validate()?;
        Ok(Self { cfg, live: Vec::new(), finished: Vec::new(), next_id: 0, last_frame: None })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    /// Live tracks, in birth order.
    pub fn tracks(&self) -> &[TrackState] {
        &self.live
    }

    /// Advances by one frame. `overrides` replaces the predicted box of the
    /// listed tracks; the rest keep their last matched box.
    pub fn step(
        &mut self,
        frame: &FrameDetections,
        overrides: Option<&BTreeMap<u64, RotatedBox>>,
    ) -> Result<StepOutcome, TrackError> {
        if let Some(prev) = self.last_frame {
            if frame.frame_index <= prev {
                return Err(TrackError::NonMonotonicFrame { previous: prev, got: frame.frame_index });
            }
        }
        self.last_frame = Some(frame.frame_index);

        for t in &mut self.live {
            t.predicted_box = overrides.and_then(|o| o.get(&t.track_id)).copied().unwrap_or(t.last_box);
        }

        let kept: Vec<usize> = (0..frame.detections.len())
            .filter(|&d| frame.detections[d].score >= self.cfg.min_score)
            .collect();
        let thr = self.cfg.iou_threshold;
        let ious: Vec<Vec<f64>> = self
            .live
            .iter()
            .map(|t| kept.iter().map(|&d| iou(&t.predicted_box, &frame.detections[d].bbox)).collect())
            .collect();
        let cost: Vec<Vec<f64>> = ious
            .iter()
            .map(|row| row.iter().map(|&v| if v >= thr { 1.0 - v } else { 1.0 }).collect())
            .collect();
        let pairs = assign_rectangular(&cost, kept.len(), 1.0)?;

        let mut track_matched = vec![None; self.live.len()];
        let mut det_matched = vec![false; kept.len()];
        for (t, k) in pairs {
            if ious[t][k] >= thr {
                track_matched[t] = Some(k);
                det_matched[k] = true;
            }
        }

        let mut outcome = StepOutcome::default();
        let mut survivors = Vec::with_capacity(self.live.len() + kept.len());
        for (t, mut track) in std::mem::take(&mut self.live).into_iter().enumerate() {
            match track_matched[t] {
                Some(k) => {
                    let det = &frame.detections[kept[k]];
                    track.last_box = det.bbox;
                    track.missed_frames = 0;
                    track.history.push(HistoryEntry {
                        frame_index: frame.frame_index,
                        bbox: det.bbox,
                        transcription: det.transcription.clone(),
                        category: det.category,
                        score: det.score,
                    });
                    outcome.matches.push((track.track_id, kept[k]));
                    survivors.push(track);
                }
                None => {
                    track.missed_frames += 1;
                    if track.missed_frames > self.cfg.max_age {
                        outcome.dead.push(track.track_id);
                        self.finished.push(track);
                    } else {
                        survivors.push(track);
                    }
                }
            }
        }
        for (k, &d) in kept.iter().enumerate() {
            if det_matched[k] {
                continue;
            }
            let det = &frame.detections[d];
            let id = self.next_id;
            self.next_id += 1;
            survivors.push(TrackState {
                track_id: id,
                last_box: det.bbox,
                predicted_box: det.bbox,
                missed_frames: 0,
                history: vec![HistoryEntry {
                    frame_index: frame.frame_index,
                    bbox: det.bbox,
                    transcription: det.transcription.clone(),
                    category: det.category,
                    score: det.score,
                }],
            });
            outcome.born.push(id);
        }
        self.live = survivors;
        Ok(outcome)
    }

    /// Every track ever born, live or dead, ordered by id.
    pub fn into_trajectories(self) -> Vec<Trajectory> {
        let mut all: Vec<Trajectory> =
            self.finished.iter().chain(self.live.iter()).map(TrackState::to_trajectory).collect();
        all.sort_by_key(|t| t.track_id);
        all
    }
}

/// Runs the tracker over a whole stream, using each frame's `track_boxes`
/// as overrides.
pub fn run(stream: &[FrameDetections], cfg: TrackerConfig) -> Result<Vec<Trajectory>, TrackError> {
    let mut tracker = Tracker::new(cfg)?;
    for frame in stream {
        let overrides = (!frame.track_boxes.is_empty()).then_some(&frame.track_boxes);
        tracker.step(frame, overrides)?;
    }
    Ok(tracker.into_trajectories())
}

/// Independent videos tracked side by side; output order follows input.
pub fn run_corpus(
    streams: &[Vec<FrameDetections>],
    cfg: TrackerConfig,
    exec: Execution,
) -> Result<Vec<Vec<Trajectory>>, TrackError> {
    exec.map(streams, |s| run(s, cfg)).into_iter().collect()
}
