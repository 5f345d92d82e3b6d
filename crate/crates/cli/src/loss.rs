//! Per-frame set loss between a ground-truth annotation and a detection
//! file whose scores act as text probabilities.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use vtspot_core::annotations::{DetectionSet, VideoAnnotation};
use vtspot_core::geometry::{quad_to_rotated, RotatedBox};
use vtspot_core::matching::{
    match_sets, set_loss_terms, CostWeights, GroundTruthInstance, LossTerms, PredictedInstance,
};

use crate::error::CliError;

/// Boxes are measured in units of the longer image side. One factor for both
/// axes keeps rotated rectangles rectangular.
fn normalizer(gt: &VideoAnnotation) -> f64 {
    1.0 / f64::from(gt.meta.width.max(gt.meta.height))
}

pub fn set_loss_report(gt: &VideoAnnotation, dets: &DetectionSet, w: &CostWeights) -> Result<Value, CliError> {
    if gt.meta.video_id != dets.meta.video_id || gt.meta.frame_count != dets.meta.frame_count {
        return Err(CliError::Semantic(format!(
            "ground truth is {:?} with {} frames, predictions are {:?} with {} frames",
            gt.meta.video_id, gt.meta.frame_count, dets.meta.video_id, dets.meta.frame_count
        )));
    }
    let s = normalizer(gt);
    let scale = |b: &RotatedBox| b.scaled(s, s).map_err(|e| CliError::Semantic(e.to_string()));
    // Stand-in for a missing prediction: no text, covering the whole image.
    let blank = PredictedInstance::new(
        0.0,
        RotatedBox::new(0.5 * f64::from(gt.meta.width) * s, 0.5 * f64::from(gt.meta.height) * s, 1.0, 1.0, 0.0)
            .map_err(|e| CliError::Semantic(e.to_string()))?,
    )?;

    let indices: BTreeSet<usize> = gt
        .frames()
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(f, _)| *f)
        .chain(dets.frames.iter().filter(|f| !f.detections.is_empty()).map(|f| f.frame_index))
        .collect();

    let mut total = LossTerms::default();
    let mut match_cost = 0.0;
    let mut frames = Vec::new();
    for f in indices {
        let mut gts = Vec::new();
        for inst in gt.frame(f) {
            gts.push(GroundTruthInstance::Object(scale(&quad_to_rotated(&inst.quad).map_err(|e| {
                CliError::Schema(format!("frame {f} track {}: {e}", inst.track_id))
            })?)?));
        }
        let mut preds = Vec::new();
        if let Some(fd) = dets.frames.iter().find(|d| d.frame_index == f) {
            for d in &fd.detections {
                preds.push(PredictedInstance::new(d.score, scale(&d.bbox)?)?);
            }
        }
        let (n_gt, n_pred) = (gts.len(), preds.len());
        let size = n_gt.max(n_pred);
        gts.resize(size, GroundTruthInstance::NoObject);
        preds.resize(size, blank);
        let a = match_sets(&gts, &preds, w)?;
        let terms = set_loss_terms(&gts, &preds, &a, w)?;
        total += terms;
        match_cost += a.total_cost;
        frames.push(json!({
            "frame": f,
            "gt_count": n_gt,
            "pred_count": n_pred,
            "pairs": a.pairs,
            "match_cost": a.total_cost,
            "terms": terms,
            "total": terms.total(),
        }));
    }
    Ok(json!({
        "video_id": gt.meta.video_id,
        "weights": w,
        "box_unit": 1.0 / s,
        "frames": frames,
        "terms": total,
        "match_cost": match_cost,
        "total": total.total(),
    }))
}
