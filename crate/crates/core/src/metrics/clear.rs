//! CLEAR-MOT accuracy and precision.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{check_same_video, prepare_frames, ratio, validate_threshold, MetricsError, MotCounters};
use crate::annotations::VideoAnnotation;
use crate::matching::assign_rectangular;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotScores {
    pub mota: f64,
    /// Mean IoU over matched pairs.
    pub motp: f64,
    pub counters: MotCounters,
}

impl MotScores {
    pub fn from_counters(c: MotCounters, degenerate: &mut Vec<String>) -> Self {
        let errors = (c.misses + c.false_positives + c.mismatches) as f64;
        let mota = if c.gt_count > 0 {
            1.0 - errors / c.gt_count as f64
        } else {
            degenerate.push("mota".into());
            0.0
        };
        let motp = ratio(c.matched_iou_sum, c.matches as f64, "motp", degenerate);
        Self { mota, motp, counters: c }
    }
}

pub fn eval_mot(
    gt: &VideoAnnotation,
    pred: &VideoAnnotation,
    iou_threshold: f64,
) -> Result<MotScores, MetricsError> {
    Ok(MotScores::from_counters(mot_counters(gt, pred, iou_threshold)?, &mut Vec::new()))
}

pub(crate) fn mot_counters(
    gt: &VideoAnnotation,
    pred: &VideoAnnotation,
    iou_threshold: f64,
) -> Result<MotCounters, MetricsError> {
    check_same_video(gt, pred)?;
    validate_threshold(iou_threshold)?;
    let mut c = MotCounters::default();
    // Last established prediction id for each GT id, kept across gaps.
    let mut last: HashMap<u64, u64> = HashMap::new();

    for frame in prepare_frames(gt, pred, iou_threshold) {
        let (ng, np) = (frame.gt.len(), frame.pred.len());
        let mut gt_match: Vec<Option<usize>> = vec![None; ng];
        let mut pred_used = vec![false; np];

        for (g, inst) in frame.gt.iter().enumerate() {
            let Some(&pid) = last.get(&inst.track_id) else { continue };
            if let Some(p) = frame.pred.iter().position(|q| q.track_id == pid) {
                if !pred_used[p] && frame.iou[g][p] >= iou_threshold {
                    gt_match[g] = Some(p);
                    pred_used[p] = true;
                }
            }
        }

        let free_g: Vec<usize> = (0..ng).filter(|&g| gt_match[g].is_none()).collect();
        let free_p: Vec<usize> = (0..np).filter(|&p| !pred_used[p]).collect();
        let cost: Vec<Vec<f64>> = free_g
            .iter()
            .map(|&g| {
                free_p
                    .iter()
                    .map(|&p| {
                        let v = frame.iou[g][p];
                        if v >= iou_threshold {
                            1.0 - v
                        } else {
                            1.0
                        }
                    })
                    .collect()
            })
            .collect();
        for (i, j) in assign_rectangular(&cost, free_p.len(), 1.0)? {
            let (g, p) = (free_g[i], free_p[j]);
            if frame.iou[g][p] >= iou_threshold {
                gt_match[g] = Some(p);
            }
        }

        let mut matched = 0u64;
        for (g, m) in gt_match.iter().enumerate() {
            let Some(p) = *m else { continue };
            matched += 1;
            c.matched_iou_sum += frame.iou[g][p];
            let pid = frame.pred[p].track_id;
            if let Some(prev) = last.insert(frame.gt[g].track_id, pid) {
                if prev != pid {
                    c.mismatches += 1;
                }
            }
        }
        c.matches += matched;
        c.gt_count += ng as u64;
        c.misses += ng as u64 - matched;
        c.false_positives += np as u64 - matched;
    }
    Ok(c)
}
