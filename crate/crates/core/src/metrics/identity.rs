//! Identity metrics from a global one-to-one assignment of trajectories.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    check_same_video, normalize_transcription, prepare_frames, ratio, EvalOptions, IdCounters, IdMode,
    MetricsError, PreparedFrame, TrackCoverage,
};
use crate::annotations::{Instance, VideoAnnotation};
use crate::matching::assign_rectangular;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdScores {
    pub idp: f64,
    pub idr: f64,
    pub idf1: f64,
    pub mt: u64,
    pub ml: u64,
    pub counters: IdCounters,
    pub coverage: TrackCoverage,
}

impl IdScores {
    pub fn from_counters(c: IdCounters, coverage: TrackCoverage, degenerate: &mut Vec<String>) -> Self {
        let tp = c.id_tp as f64;
        Self {
            idp: ratio(tp, tp + c.id_fp as f64, "idp", degenerate),
            idr: ratio(tp, tp + c.id_fn as f64, "idr", degenerate),
            idf1: ratio(2.0 * tp, 2.0 * tp + c.id_fp as f64 + c.id_fn as f64, "idf1", degenerate),
            mt: coverage.mt,
            ml: coverage.ml,
            counters: c,
            coverage,
        }
    }
}

/// GT ↔ predicted trajectory pairs chosen by the identity assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityAssignment {
    /// `(gt index, pred index, shared frames)`, only pairs that share at
    /// least one frame, ordered by GT index.
    pub pairs: Vec<(usize, usize, u64)>,
    pub id_tp: u64,
}

/// Identity scores from a GT × prediction overlap table and the trajectory
/// lengths on each side.
pub fn identity_from_overlaps(
    overlap: &[Vec<u64>],
    gt_len: &[u64],
    pred_len: &[u64],
) -> Result<(IdScores, IdentityAssignment), MetricsError> {
    if overlap.len() != gt_len.len() {
        return Err(MetricsError::InvalidOption(format!(
            "overlap table has {} rows for {} GT trajectories",
            overlap.len(),
            gt_len.len()
        )));
    }
    for (g, row) in overlap.iter().enumerate() {
        if row.len() != pred_len.len() {
            return Err(MetricsError::InvalidOption(format!(
                "overlap row {g} has {} columns for {} predicted trajectories",
                row.len(),
                pred_len.len()
            )));
        }
        if let Some(p) = (0..row.len()).find(|&p| row[p] > gt_len[g].min(pred_len[p])) {
            return Err(MetricsError::InvalidOption(format!(
                "overlap ({g}, {p}) = {} exceeds a trajectory length",
                row[p]
            )));
        }
    }

    let top = overlap.iter().flatten().copied().max().unwrap_or(0);
    // Integral costs keep the solver exact.
    let cost: Vec<Vec<f64>> =
        overlap.iter().map(|row| row.iter().map(|&o| (top - o) as f64).collect()).collect();
    let mut pairs: Vec<(usize, usize, u64)> = assign_rectangular(&cost, pred_len.len(), top as f64)?
        .into_iter()
        .filter(|&(g, p)| overlap[g][p] > 0)
        .map(|(g, p)| (g, p, overlap[g][p]))
        .collect();
    pairs.sort_unstable();
    let id_tp: u64 = pairs.iter().map(|p| p.2).sum();

    let mut covered = vec![0u64; gt_len.len()];
    for &(g, _, o) in &pairs {
        covered[g] = o;
    }
    let mut coverage = TrackCoverage { gt_tracks: gt_len.len() as u64, mt: 0, ml: 0 };
    for (&len, &o) in gt_len.iter().zip(&covered) {
        if 5 * o >= 4 * len {
            coverage.mt += 1;
        }
        if 5 * o < len {
            coverage.ml += 1;
        }
    }
    let counters = IdCounters {
        id_tp,
        id_fp: pred_len.iter().sum::<u64>() - id_tp,
        id_fn: gt_len.iter().sum::<u64>() - id_tp,
    };
    let scores = IdScores::from_counters(counters, coverage, &mut Vec::new());
    Ok((scores, IdentityAssignment { pairs, id_tp }))
}

pub fn eval_id(
    gt: &VideoAnnotation,
    pred: &VideoAnnotation,
    mode: IdMode,
    opts: &EvalOptions,
) -> Result<IdScores, MetricsError> {
    check_same_video(gt, pred)?;
    opts.validate()?;
    let frames = prepare_frames(gt, pred, opts.iou_threshold);
    if mode == IdMode::Spotting {
        require_transcriptions(&frames)?;
    }

    let gt_index: BTreeMap<u64, usize> = frames
        .iter()
        .flat_map(|f| f.gt.iter().map(|i| i.track_id))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(k, id)| (id, k))
        .collect();
    let pred_index = canonical_pred_order(&frames);

    let mut gt_len = vec![0u64; gt_index.len()];
    let mut pred_len = vec![0u64; pred_index.len()];
    let mut overlap = vec![vec![0u64; pred_index.len()]; gt_index.len()];
    for f in &frames {
        let gt_text: Vec<Option<String>> = text_keys(&f.gt, mode, opts);
        let pred_text: Vec<Option<String>> = text_keys(&f.pred, mode, opts);
        for g in &f.gt {
            gt_len[gt_index[&g.track_id]] += 1;
        }
        for p in &f.pred {
            pred_len[pred_index[&p.track_id]] += 1;
        }
        for (g, row) in f.iou.iter().enumerate() {
            for (p, &v) in row.iter().enumerate() {
                if v <= opts.id_iou_floor {
                    continue;
                }
                if mode == IdMode::Spotting && (gt_text[g].is_none() || gt_text[g] != pred_text[p]) {
                    continue;
                }
                overlap[gt_index[&f.gt[g].track_id]][pred_index[&f.pred[p].track_id]] += 1;
            }
        }
    }
    Ok(identity_from_overlaps(&overlap, &gt_len, &pred_len)?.0)
}

pub(crate) fn require_transcriptions(frames: &[PreparedFrame<'_>]) -> Result<(), MetricsError> {
    for f in frames {
        if let Some(p) = f.pred.iter().find(|p| p.transcription().is_none()) {
            return Err(MetricsError::MissingTranscription { frame: f.frame, track_id: p.track_id });
        }
    }
    Ok(())
}

fn text_keys(instances: &[&Instance], mode: IdMode, opts: &EvalOptions) -> Vec<Option<String>> {
    match mode {
        IdMode::Tracking => vec![None; instances.len()],
        IdMode::Spotting => instances
            .iter()
            .map(|i| i.transcription().map(|t| normalize_transcription(t, opts.case_insensitive)))
            .collect(),
    }
}

/// Orders predicted trajectories by content rather than by label, so that
/// renaming predicted ids cannot change which optimal assignment is picked.
fn canonical_pred_order(frames: &[PreparedFrame<'_>]) -> BTreeMap<u64, usize> {
    let mut tracks: BTreeMap<u64, Vec<(usize, &Instance)>> = BTreeMap::new();
    for f in frames {
        for p in &f.pred {
            tracks.entry(p.track_id).or_default().push((f.frame, p));
        }
    }
    let mut ordered: Vec<(u64, Vec<(usize, &Instance)>)> = tracks.into_iter().collect();
    ordered.sort_by(|a, b| compare_tracks(&a.1, &b.1));
    ordered.into_iter().enumerate().map(|(k, (id, _))| (id, k)).collect()
}

fn compare_tracks(a: &[(usize, &Instance)], b: &[(usize, &Instance)]) -> Ordering {
    a.len().cmp(&b.len()).reverse().then_with(|| {
        for ((fa, ia), (fb, ib)) in a.iter().zip(b) {
            let ord = fa.cmp(fb).then_with(|| {
                let (qa, qb) = (ia.quad.to_flat(), ib.quad.to_flat());
                qa.iter()
                    .zip(&qb)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| ia.transcription().cmp(&ib.transcription()))
            });
            if ord.is_ne() {
                return ord;
            }
        }
        Ordering::Equal
    })
}
