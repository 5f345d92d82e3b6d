//! Evaluation: detection precision/recall/F, CLEAR-MOT, identity metrics and
//! the end-to-end spotting variant.
//!
//! Ground-truth instances transcribed `###` are don't-care regions: they are
//! dropped from every denominator, and predictions overlapping one by at
//! least the matching IoU threshold are dropped too. Ratios whose
//! denominator is zero are reported as 0 and listed in
//! [`MetricsReport::degenerate_ratios`].

mod clear;
mod detection;
mod identity;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::annotations::{Instance, VideoAnnotation};
use crate::geometry::region_iou;
use crate::matching::MatchingError;

pub use clear::{eval_mot, MotScores};
pub use detection::{eval_detection, DetectionScores};
pub use identity::{eval_id, identity_from_overlaps, IdScores, IdentityAssignment};
pub use report::{aggregate, evaluate, evaluate_corpus, eval_spotting, CorpusReport, VideoReport};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("ground truth and prediction describe different videos: {0}")]
    VideoMismatch(String),
    #[error("prediction for track {track_id} in frame {frame} has no transcription")]
    MissingTranscription { frame: usize, track_id: u64 },
    #[error("nothing to aggregate")]
    EmptyInput,
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Detection,
    Tracking,
    Spotting,
}

/// Whether identity overlap also requires equal transcriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdMode {
    Tracking,
    Spotting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Gate for detection matching, CLEAR correspondences and ignore-region
    /// suppression.
    pub iou_threshold: f64,
    /// Identity overlap counts frames with IoU strictly above this.
    pub id_iou_floor: f64,
    pub case_insensitive: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { iou_threshold: 0.5, id_iou_floor: 0.0, case_insensitive: false }
    }
}

impl EvalOptions {
    fn validate(&self) -> Result<(), MetricsError> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err(MetricsError::InvalidOption(format!(
                "iou_threshold {} not in (0, 1]",
                self.iou_threshold
            )));
        }
        if !(0.0..1.0).contains(&self.id_iou_floor) {
            return Err(MetricsError::InvalidOption(format!(
                "id_iou_floor {} not in [0, 1)",
                self.id_iou_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionCounters {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MotCounters {
    pub misses: u64,
    pub false_positives: u64,
    pub mismatches: u64,
    pub matches: u64,
    pub gt_count: u64,
    pub matched_iou_sum: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdCounters {
    pub id_tp: u64,
    pub id_fp: u64,
    pub id_fn: u64,
}

/// Mostly-tracked / mostly-lost ground-truth track counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackCoverage {
    pub gt_tracks: u64,
    pub mt: u64,
    pub ml: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: Task,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub mota: f64,
    pub motp: f64,
    pub idp: f64,
    pub idr: f64,
    pub idf1: f64,
    pub mt: u64,
    pub ml: u64,
    pub gt_tracks: u64,
    pub detection: DetectionCounters,
    pub mot: MotCounters,
    pub id: IdCounters,
    pub degenerate: bool,
    pub degenerate_ratios: Vec<String>,
}

/// `num / den`, or 0 with the ratio's name recorded when `den` is zero.
pub(crate) fn ratio(num: f64, den: f64, name: &str, degenerate: &mut Vec<String>) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        degenerate.push(name.to_owned());
        0.0
    }
}

impl MetricsReport {
    /// Recomputes every ratio from raw counters.
    pub fn from_counters(
        task: Task,
        detection: DetectionCounters,
        mot: MotCounters,
        id: IdCounters,
        coverage: TrackCoverage,
    ) -> Self {
        let mut deg = Vec::new();
        let d = DetectionScores::from_counters(detection, &mut deg);
        let (mut mota, mut motp, mut idp, mut idr, mut idf1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        if task != Task::Detection {
            let m = MotScores::from_counters(mot, &mut deg);
            (mota, motp) = (m.mota, m.motp);
            let i = IdScores::from_counters(id, coverage, &mut deg);
            (idp, idr, idf1) = (i.idp, i.idr, i.idf1);
        }
        Self {
            task,
            precision: d.precision,
            recall: d.recall,
            fscore: d.fscore,
            mota,
            motp,
            idp,
            idr,
            idf1,
            mt: coverage.mt,
            ml: coverage.ml,
            gt_tracks: coverage.gt_tracks,
            detection,
            mot,
            id,
            degenerate: !deg.is_empty(),
            degenerate_ratios: deg,
        }
    }

    pub fn coverage(&self) -> TrackCoverage {
        TrackCoverage { gt_tracks: self.gt_tracks, mt: self.mt, ml: self.ml }
    }
}

/// Unicode NFC, surrounding whitespace trimmed, optionally lower-cased.
pub fn normalize_transcription(s: &str, case_insensitive: bool) -> String {
    let n: String = s.trim().nfc().collect();
    if case_insensitive {
        n.to_lowercase()
    } else {
        n
    }
}

pub(crate) fn check_same_video(gt: &VideoAnnotation, pred: &VideoAnnotation) -> Result<(), MetricsError> {
    if gt.meta.video_id != pred.meta.video_id {
        return Err(MetricsError::VideoMismatch(format!(
            "video_id {:?} vs {:?}",
            gt.meta.video_id, pred.meta.video_id
        )));
    }
    if gt.meta.frame_count != pred.meta.frame_count {
        return Err(MetricsError::VideoMismatch(format!(
            "frame_count {} vs {}",
            gt.meta.frame_count, pred.meta.frame_count
        )));
    }
    Ok(())
}

/// One frame after don't-care filtering, with its GT × prediction IoU table.
pub(crate) struct PreparedFrame<'a> {
    pub frame: usize,
    pub gt: Vec<&'a Instance>,
    pub pred: Vec<&'a Instance>,
    pub iou: Vec<Vec<f64>>,
}

pub(crate) fn prepare_frames<'a>(
    gt: &'a VideoAnnotation,
    pred: &'a VideoAnnotation,
    ignore_iou: f64,
) -> Vec<PreparedFrame<'a>> {
    let mut indices: Vec<usize> = gt.frames().keys().chain(pred.frames().keys()).copied().collect();
    indices.sort_unstable();
    indices.dedup();
    indices
        .into_iter()
        .map(|f| {
            let (ignored, kept): (Vec<&Instance>, Vec<&Instance>) =
                gt.frame(f).iter().partition(|i| i.ignore());
            let pred: Vec<&Instance> = pred
                .frame(f)
                .iter()
                .filter(|p| !ignored.iter().any(|g| region_iou(&g.quad, &p.quad) >= ignore_iou))
                .collect();
            let iou = kept.iter().map(|g| pred.iter().map(|p| region_iou(&g.quad, &p.quad)).collect()).collect();
            PreparedFrame { frame: f, gt: kept, pred, iou }
        })
        .collect()
}

pub(crate) fn validate_threshold(iou_threshold: f64) -> Result<(), MetricsError> {
    EvalOptions { iou_threshold, ..Default::default() }.validate()
}
