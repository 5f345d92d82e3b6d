//! Whole-video reports, corpus aggregation and export.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::clear::mot_counters;
use super::detection::detection_counters;
use super::identity::require_transcriptions;
use super::{
    eval_id, prepare_frames, check_same_video, DetectionCounters, EvalOptions, IdCounters, IdMode,
    MetricsError, MetricsReport, MotCounters, Task, TrackCoverage,
};
use crate::annotations::VideoAnnotation;
use crate::exec::Execution;

/// Geometry-only detection and CLEAR scores, identity scores that also
/// require equal transcriptions.
pub fn eval_spotting(
    gt: &VideoAnnotation,
    pred: &VideoAnnotation,
    opts: &EvalOptions,
) -> Result<MetricsReport, MetricsError> {
    check_same_video(gt, pred)?;
    opts.validate()?;
    require_transcriptions(&prepare_frames(gt, pred, opts.iou_threshold))?;
    let det = detection_counters(gt, pred, opts.iou_threshold)?;
    let mot = mot_counters(gt, pred, opts.iou_threshold)?;
    let id = eval_id(gt, pred, IdMode::Spotting, opts)?;
    Ok(MetricsReport::from_counters(Task::Spotting, det, mot, id.counters, id.coverage))
}

pub fn evaluate(
    gt: &VideoAnnotation,
    pred: &VideoAnnotation,
    task: Task,
    opts: &EvalOptions,
) -> Result<MetricsReport, MetricsError> {
    opts.validate()?;
    match task {
        Task::Detection => {
            let det = detection_counters(gt, pred, opts.iou_threshold)?;
            Ok(MetricsReport::from_counters(
                task,
                det,
                MotCounters::default(),
                IdCounters::default(),
                TrackCoverage::default(),
            ))
        }
        Task::Tracking => {
            let det = detection_counters(gt, pred, opts.iou_threshold)?;
            let mot = mot_counters(gt, pred, opts.iou_threshold)?;
            let id = eval_id(gt, pred, IdMode::Tracking, opts)?;
            Ok(MetricsReport::from_counters(task, det, mot, id.counters, id.coverage))
        }
        Task::Spotting => eval_spotting(gt, pred, opts),
    }
}

/// Sums raw counters and recomputes every ratio from the sums.
pub fn aggregate(reports: &[MetricsReport]) -> Result<MetricsReport, MetricsError> {
    let first = reports.first().ok_or(MetricsError::EmptyInput)?;
    if let Some(r) = reports.iter().find(|r| r.task != first.task) {
        return Err(MetricsError::InvalidOption(format!(
            "cannot aggregate {:?} with {:?} reports",
            first.task, r.task
        )));
    }
    let mut det = DetectionCounters::default();
    let mut mot = MotCounters::default();
    let mut id = IdCounters::default();
    let mut cov = TrackCoverage::default();
    for r in reports {
        det.tp += r.detection.tp;
        det.fp += r.detection.fp;
        det.fn_ += r.detection.fn_;
        mot.misses += r.mot.misses;
        mot.false_positives += r.mot.false_positives;
        mot.mismatches += r.mot.mismatches;
        mot.matches += r.mot.matches;
        mot.gt_count += r.mot.gt_count;
        mot.matched_iou_sum += r.mot.matched_iou_sum;
        id.id_tp += r.id.id_tp;
        id.id_fp += r.id.id_fp;
        id.id_fn += r.id.id_fn;
        cov.gt_tracks += r.gt_tracks;
        cov.mt += r.mt;
        cov.ml += r.ml;
    }
    Ok(MetricsReport::from_counters(first.task, det, mot, id, cov))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoReport {
    pub video_id: String,
    pub scenario: Option<String>,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub videos: Vec<VideoReport>,
    pub aggregate: MetricsReport,
}

/// Evaluates `(gt, pred)` pairs independently, then folds them in input
/// order.
pub fn evaluate_corpus(
    pairs: &[(VideoAnnotation, VideoAnnotation)],
    task: Task,
    opts: &EvalOptions,
    exec: Execution,
) -> Result<CorpusReport, MetricsError> {
    let reports: Vec<MetricsReport> =
        exec.map(pairs, |(g, p)| evaluate(g, p, task, opts)).into_iter().collect::<Result<_, _>>()?;
    let aggregate = aggregate(&reports)?;
    let videos = pairs
        .iter()
        .zip(reports)
        .map(|((g, _), report)| VideoReport {
            video_id: g.meta.video_id.clone(),
            scenario: g.meta.scenario.clone(),
            report,
        })
        .collect();
    Ok(CorpusReport { videos, aggregate })
}

impl CorpusReport {
    /// Aggregates per scenario label; videos without one are skipped.
    pub fn by_scenario(&self) -> Result<BTreeMap<String, MetricsReport>, MetricsError> {
        let mut groups: BTreeMap<String, Vec<MetricsReport>> = BTreeMap::new();
        for v in &self.videos {
            if let Some(s) = &v.scenario {
                groups.entry(s.clone()).or_default().push(v.report.clone());
            }
        }
        groups.into_iter().map(|(k, v)| Ok((k, aggregate(&v)?))).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize") + "\n"
    }

    /// One row per video, then one per scenario, then the corpus total.
    pub fn to_csv(&self) -> Result<String, MetricsError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| MetricsError::InvalidOption(format!("csv export failed: {e}"));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for v in &self.videos {
            w.write_record(csv_row("video", &v.video_id, v.scenario.as_deref(), &v.report))
                .map_err(csv_err)?;
        }
        for (s, r) in self.by_scenario()? {
            w.write_record(csv_row("scenario", &s, Some(&s), &r)).map_err(csv_err)?;
        }
        w.write_record(csv_row("total", "all", None, &self.aggregate)).map_err(csv_err)?;
        let bytes = w.into_inner().map_err(|e| MetricsError::InvalidOption(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

const CSV_HEADER: [&str; 25] = [
    "kind", "key", "scenario", "task", "precision", "recall", "fscore", "mota", "motp", "idp", "idr", "idf1",
    "mt", "ml", "gt_tracks", "tp", "fp", "fn", "misses", "false_positives", "mismatches", "matches",
    "id_tp", "id_fp", "id_fn",
];

fn csv_row(kind: &str, key: &str, scenario: Option<&str>, r: &MetricsReport) -> Vec<String> {
    let task = match r.task {
        Task::Detection => "detection",
        Task::Tracking => "tracking",
        Task::Spotting => "spotting",
    };
    let mut row: Vec<String> = vec![kind.into(), key.into(), scenario.unwrap_or("").into(), task.into()];
    row.extend([r.precision, r.recall, r.fscore, r.mota, r.motp, r.idp, r.idr, r.idf1].map(|v| format!("{v:.6}")));
    row.extend(
        [
            r.mt,
            r.ml,
            r.gt_tracks,
            r.detection.tp,
            r.detection.fp,
            r.detection.fn_,
            r.mot.misses,
            r.mot.false_positives,
            r.mot.mismatches,
            r.mot.matches,
            r.id.id_tp,
            r.id.id_fp,
            r.id.id_fn,
        ]
        .map(|v| v.to_string()),
    );
    row
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "precision {:.6}  recall {:.6}  fscore {:.6}", self.precision, self.recall, self.fscore)?;
        if self.task != Task::Detection {
            writeln!(f, "mota {:.6}  motp {:.6}", self.mota, self.motp)?;
            writeln!(f, "idp {:.6}  idr {:.6}  idf1 {:.6}", self.idp, self.idr, self.idf1)?;
            writeln!(f, "mt {}  ml {}  of {} tracks", self.mt, self.ml, self.gt_tracks)?;
        }
        if self.degenerate {
            writeln!(f, "zero denominators: {}", self.degenerate_ratios.join(", "))?;
        }
        Ok(())
    }
}
