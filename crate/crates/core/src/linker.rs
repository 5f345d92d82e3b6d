//! Trajectory linking for image-level detectors.
//!
//! Objects in each frame are attached to trajectories whose latest element
//! is at most `window` frames old, if the boxes overlap enough and the
//! transcriptions are close in normalized edit distance. Matching is greedy
//! by descending IoU.

use std::collections::BTreeMap;

use crate::annotations::{FrameDetections, Trajectory, TrajectoryPoint};
use crate::geometry::iou;
use crate::tracker::TrackError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkerConfig {
    pub window: usize,
    pub iou_threshold: f64,
    pub max_norm_edit: f64,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        Self { window: 3, iou_threshold: 0.3, max_norm_edit: 0.3 }
    }
}

impl LinkerConfig {
    pub fn validate(&self) -> Result<(), TrackError> {
        if self.window == 0 {
            return Err(TrackError::InvalidConfig("window must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.max_norm_edit) {
            return Err(TrackError::InvalidConfig(format!(
                "max_norm_edit {} not in [0, 1]",
                self.max_norm_edit
            )));
        }
        if !(0.0..=1.0).contains(&self.iou_threshold) {
            return Err(TrackError::InvalidConfig(format!(
                "iou_threshold {} not in [0, 1]",
                self.iou_threshold
            )));
        }
        Ok(())
    }
}

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance divided by the longer string's length (at least 1).
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let len = a.chars().count().max(b.chars().count()).max(1);
    edit_distance(a, b) as f64 / len as f64
}

pub fn link(stream: &[FrameDetections], cfg: LinkerConfig) -> Result<Vec<Trajectory>, TrackError> {
    cfg.validate()?;
    let mut trajectories: Vec<Trajectory> = Vec::new();
    let mut previous: Option<usize> = None;

    for frame in stream {
        let f = frame.frame_index;
        if let Some(p) = previous {
            if f <= p {
                return Err(TrackError::NonMonotonicFrame { previous: p, got: f });
            }
        }
        previous = Some(f);

        let open: Vec<usize> = trajectories
            .iter()
            .enumerate()
            .filter(|(_, t)| t.last_frame().is_some_and(|l| f - l <= cfg.window))
            .map(|(i, _)| i)
            .collect();

        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for (d, det) in frame.detections.iter().enumerate() {
            let text = det.transcription.as_deref().unwrap_or("");
            for &t in &open {
                let (_, last) = trajectories[t].points.last_key_value().expect("non-empty trajectory");
                let overlap = iou(&last.bbox, &det.bbox);
                if overlap <= 0.0 || overlap < cfg.iou_threshold {
                    continue;
                }
                let prev_text = last.transcription.as_deref().unwrap_or("");
                if normalized_edit_distance(prev_text, text) <= cfg.max_norm_edit {
                    candidates.push((overlap, d, t));
                }
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut det_to_traj: BTreeMap<usize, usize> = BTreeMap::new();
        let mut taken = vec![false; trajectories.len()];
        for (_, d, t) in candidates {
            if det_to_traj.contains_key(&d) || taken[t] {
                continue;
            }
            taken[t] = true;
            det_to_traj.insert(d, t);
        }

        for (d, det) in frame.detections.iter().enumerate() {
            let point = TrajectoryPoint {
                bbox: det.bbox,
                transcription: det.transcription.clone(),
                category: det.category,
                score: Some(det.score),
            };
            match det_to_traj.get(&d) {
                Some(&t) => {
                    trajectories[t].points.insert(f, point);
                }
                None => {
                    let id = trajectories.len() as u64;
                    trajectories.push(Trajectory { track_id: id, points: [(f, point)].into_iter().collect() });
                }
            }
        }
    }
    Ok(trajectories)
}
