//! Frame-level detection precision, recall and F-score.

use serde::{Deserialize, Serialize};

use super::{check_same_video, prepare_frames, ratio, validate_threshold, DetectionCounters, MetricsError};
use crate::annotations::VideoAnnotation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionScores {
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub counters: DetectionCounters,
}

impl DetectionScores {
    pub fn from_counters(c: DetectionCounters, degenerate: &mut Vec<String>) -> Self {
        let tp = c.tp as f64;
        let precision = ratio(tp, tp + c.fp as f64, "precision", degenerate);
        let recall = ratio(tp, tp + c.fn_ as f64, "recall", degenerate);
        // 2PR/(P+R) written over counts so that P = R gives F = P exactly.
        let fscore = ratio(2.0 * tp, 2.0 * tp + c.fp as f64 + c.fn_ as f64, "fscore", degenerate);
        Self { precision, recall, fscore, counters: c }
    }
}

/// One-to-one greedy matching per frame, highest IoU first, pairs below
/// `iou_threshold` never matched.
pub fn eval_detection(
    gt: &VideoAnnotation,
    pred: &VideoAnnotation,
    iou_threshold: f64,
) -> Result<DetectionScores, MetricsError> {
    Ok(DetectionScores::from_counters(detection_counters(gt, pred, iou_threshold)?, &mut Vec::new()))
}

pub(crate) fn detection_counters(
    gt: &VideoAnnotation,
    pred: &VideoAnnotation,
    iou_threshold: f64,
) -> Result<DetectionCounters, MetricsError> {
    check_same_video(gt, pred)?;
    validate_threshold(iou_threshold)?;
    let mut c = DetectionCounters::default();
    for frame in prepare_frames(gt, pred, iou_threshold) {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (g, row) in frame.iou.iter().enumerate() {
            for (p, &v) in row.iter().enumerate() {
                if v >= iou_threshold {
                    pairs.push((v, g, p));
                }
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut gt_used = vec![false; frame.gt.len()];
        let mut pred_used = vec![false; frame.pred.len()];
        let mut tp = 0u64;
        for (_, g, p) in pairs {
            if !gt_used[g] && !pred_used[p] {
                gt_used[g] = true;
                pred_used[p] = true;
                tp += 1;
            }
        }
        c.tp += tp;
        c.fp += frame.pred.len() as u64 - tp;
        c.fn_ += frame.gt.len() as u64 - tp;
    }
    Ok(c)
}
