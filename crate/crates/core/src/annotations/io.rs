//! JSON documents for annotations, detections and trajectories.
//!
//! ```json
//! {"video_id": "v1", "width": 1280, "height": 720, "frame_count": 90,
//!  "frames": {"0": [{"id": 3, "points": [x1, y1, x2, y2, x3, y3, x4, y4],
//!                    "transcription": "OPEN", "category": "scene"}]}}
//! ```
//!
//! Detection documents share the layout; `id` is optional there and entries
//! may carry `score` and `track_box: {"id", "points"}`. Paths ending in
//! `.gz` are gzip-compressed transparently.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use super::model::{
    Detection, DetectionSet, FrameDetections, Instance, TextCategory, Trajectory, VideoAnnotation,
    VideoMeta,
};
use super::AnnotationError;
use crate::geometry::{quad_to_rotated, rotated_to_quad, Quad};

#[derive(Debug, Serialize, Deserialize)]
struct DocumentRecord {
    video_id: String,
    width: u32,
    height: u32,
    frame_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scenario: Option<String>,
    #[serde(default)]
    frames: BTreeMap<usize, Vec<InstanceRecord>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<u64>,
    points: [f64; 8],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transcription: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    track_box: Option<TrackBoxRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrackBoxRecord {
    id: u64,
    points: [f64; 8],
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"))
}

fn open_reader(path: &Path) -> Result<Box<dyn Read>, AnnotationError> {
    let file = BufReader::new(File::open(path)?);
    Ok(if is_gz(path) { Box::new(BufReader::new(GzDecoder::new(file))) } else { Box::new(file) })
}

fn write_to_path(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<(), AnnotationError>) -> Result<(), AnnotationError> {
    let file = BufWriter::new(File::create(path)?);
    if is_gz(path) {
        let mut enc = GzEncoder::new(file, Compression::default());
        body(&mut enc)?;
        enc.finish()?.flush()?;
    } else {
        let mut file = file;
        body(&mut file)?;
        file.flush()?;
    }
    Ok(())
}

fn parse_document<R: Read>(reader: R) -> Result<DocumentRecord, AnnotationError> {
    let mut de = serde_json::Deserializer::from_reader(reader);
    let doc: DocumentRecord = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        AnnotationError::Schema { path, message: e.into_inner().to_string() }
    })?;
    de.end().map_err(|e| AnnotationError::schema(".", e.to_string()))?;
    Ok(doc)
}

fn write_document(doc: &DocumentRecord, w: &mut dyn Write) -> Result<(), AnnotationError> {
    serde_json::to_writer_pretty(&mut *w, doc).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn meta_of(doc: &DocumentRecord) -> Result<VideoMeta, AnnotationError> {
    let meta = VideoMeta {
        video_id: doc.video_id.clone(),
        width: doc.width,
        height: doc.height,
        frame_count: doc.frame_count,
        scenario: doc.scenario.clone(),
    };
    meta.validate()?;
    Ok(meta)
}

fn quad_at(points: &[f64; 8], path: &str) -> Result<Quad, AnnotationError> {
    Quad::from_flat(points).map_err(|e| AnnotationError::schema(path, e.to_string()))
}

fn category_at(c: &Option<String>, path: &str) -> Result<Option<TextCategory>, AnnotationError> {
    c.as_deref()
        .map(|s| s.parse::<TextCategory>().map_err(|e| AnnotationError::schema(path, e)))
        .transpose()
}

fn check_frame(frame: usize, frame_count: usize) -> Result<(), AnnotationError> {
    if frame >= frame_count {
        Err(AnnotationError::OutOfRangeFrameIndex { frame, frame_count })
    } else {
        Ok(())
    }
}

fn annotation_from_record(doc: DocumentRecord) -> Result<VideoAnnotation, AnnotationError> {
    let meta = meta_of(&doc)?;
    let mut frames = BTreeMap::new();
    for (frame, records) in doc.frames {
        check_frame(frame, meta.frame_count)?;
        let mut instances = Vec::with_capacity(records.len());
        for (k, r) in records.into_iter().enumerate() {
            let at = |field: &str| format!("frames.{frame}[{k}].{field}");
            let id = r.id.ok_or_else(|| AnnotationError::schema(at("id"), "missing field `id`"))?;
            let quad = quad_at(&r.points, &at("points"))?;
            let category = category_at(&r.category, &at("category"))?;
            let mut inst = Instance::new(id, quad, r.transcription, category);
            if let Some(s) = r.score {
                inst = inst.with_score(score_at(s, &at("score"))?);
            }
            instances.push(inst);
        }
        frames.insert(frame, instances);
    }
    VideoAnnotation::new(meta, frames)
}

fn score_at(s: f64, path: &str) -> Result<f64, AnnotationError> {
    if (0.0..=1.0).contains(&s) {
        Ok(s)
    } else {
        Err(AnnotationError::schema(path, format!("score {s} outside [0, 1]")))
    }
}

fn record_from_annotation(ann: &VideoAnnotation) -> DocumentRecord {
    let frames = ann
        .frames()
        .iter()
        .map(|(&f, instances)| {
            let records = instances
                .iter()
                .map(|i| InstanceRecord {
                    id: Some(i.track_id),
                    points: i.quad.to_flat(),
                    transcription: i.transcription().map(str::to_owned),
                    category: i.category.map(|c| c.as_str().to_owned()),
                    score: i.score,
                    track_box: None,
                })
                .collect();
            (f, records)
        })
        .collect();
    record_with_meta(&ann.meta, frames)
}

fn record_with_meta(meta: &VideoMeta, frames: BTreeMap<usize, Vec<InstanceRecord>>) -> DocumentRecord {
    DocumentRecord {
        video_id: meta.video_id.clone(),
        width: meta.width,
        height: meta.height,
        frame_count: meta.frame_count,
        scenario: meta.scenario.clone(),
        frames,
    }
}

fn detections_from_record(doc: DocumentRecord) -> Result<DetectionSet, AnnotationError> {
    let meta = meta_of(&doc)?;
    let mut frames: Vec<FrameDetections> =
        (0..meta.frame_count).map(|f| FrameDetections::new(f, Vec::new())).collect();
    for (frame, records) in doc.frames {
        check_frame(frame, meta.frame_count)?;
        let slot = &mut frames[frame];
        for (k, r) in records.into_iter().enumerate() {
            let at = |field: &str| format!("frames.{frame}[{k}].{field}");
            let quad = quad_at(&r.points, &at("points"))?;
            let bbox = quad_to_rotated(&quad).map_err(|e| AnnotationError::schema(at("points"), e.to_string()))?;
            let score = score_at(r.score.unwrap_or(1.0), &at("score"))?;
            let category = category_at(&r.category, &at("category"))?;
            if let Some(tb) = r.track_box {
                let tq = quad_at(&tb.points, &at("track_box.points"))?;
                let tbox = quad_to_rotated(&tq)
                    .map_err(|e| AnnotationError::schema(at("track_box.points"), e.to_string()))?;
                if slot.track_boxes.insert(tb.id, tbox).is_some() {
                    return Err(AnnotationError::DuplicateTrackIdInFrame { frame, track_id: tb.id });
                }
            }
            slot.detections.push(Detection { quad, bbox, score, transcription: r.transcription, category });
        }
    }
    Ok(DetectionSet { meta, frames })
}

fn record_from_detections(set: &DetectionSet) -> DocumentRecord {
    let mut frames = BTreeMap::new();
    for fd in &set.frames {
        if fd.detections.is_empty() {
            continue;
        }
        // Track boxes ride on detection entries in id order; a frame with
        // more track boxes than detections cannot carry the surplus.
        let mut track_boxes = fd.track_boxes.iter();
        let records = fd
            .detections
            .iter()
            .map(|d| InstanceRecord {
                id: None,
                points: d.quad.to_flat(),
                transcription: d.transcription.clone(),
                category: d.category.map(|c| c.as_str().to_owned()),
                score: Some(d.score),
                track_box: track_boxes
                    .next()
                    .map(|(&id, b)| TrackBoxRecord { id, points: rotated_to_quad(b).to_flat() }),
            })
            .collect();
        frames.insert(fd.frame_index, records);
    }
    record_with_meta(&set.meta, frames)
}

pub fn read_annotation<R: Read>(reader: R) -> Result<VideoAnnotation, AnnotationError> {
    annotation_from_record(parse_document(reader)?)
}

pub fn load_annotation(path: impl AsRef<Path>) -> Result<VideoAnnotation, AnnotationError> {
    read_annotation(open_reader(path.as_ref())?)
}

pub fn write_annotation(ann: &VideoAnnotation, w: &mut dyn Write) -> Result<(), AnnotationError> {
    write_document(&record_from_annotation(ann), w)
}

pub fn annotation_to_string(ann: &VideoAnnotation) -> String {
    let mut buf = Vec::new();
    write_annotation(ann, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn save_annotation(ann: &VideoAnnotation, path: impl AsRef<Path>) -> Result<(), AnnotationError> {
    write_to_path(path.as_ref(), |w| write_annotation(ann, w))
}

pub fn read_detections<R: Read>(reader: R) -> Result<DetectionSet, AnnotationError> {
    detections_from_record(parse_document(reader)?)
}

/// Loads a detection stream with one [`FrameDetections`] per frame index in
/// `0..frame_count`, including empty frames.
pub fn load_detections(path: impl AsRef<Path>) -> Result<DetectionSet, AnnotationError> {
    read_detections(open_reader(path.as_ref())?)
}

pub fn write_detections(set: &DetectionSet, w: &mut dyn Write) -> Result<(), AnnotationError> {
    write_document(&record_from_detections(set), w)
}

pub fn save_detections(set: &DetectionSet, path: impl AsRef<Path>) -> Result<(), AnnotationError> {
    write_to_path(path.as_ref(), |w| write_detections(set, w))
}

pub fn save_trajectories(
    meta: &VideoMeta,
    trajectories: &[Trajectory],
    path: impl AsRef<Path>,
) -> Result<(), AnnotationError> {
    let ann = VideoAnnotation::from_trajectories(meta.clone(), trajectories)?;
    save_annotation(&ann, path)
}
