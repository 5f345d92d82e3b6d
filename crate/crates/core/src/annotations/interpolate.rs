//! Keyframe sampling and linear corner interpolation.

use std::collections::BTreeMap;

use super::model::{Instance, VideoAnnotation, VideoMeta};
use super::AnnotationError;
use crate::geometry::{signed_area, Point2, Quad};

/// Annotation kept only on frames `0, k, 2k, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledAnnotation {
    step: usize,
    annotation: VideoAnnotation,
}

impl SampledAnnotation {
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn annotation(&self) -> &VideoAnnotation {
        &self.annotation
    }

    pub fn into_annotation(self) -> VideoAnnotation {
        self.annotation
    }

    pub fn interpolate(&self, frame_count: usize) -> Result<VideoAnnotation, AnnotationError> {
        interpolate(&self.annotation, frame_count)
    }
}

pub fn sample(dense: &VideoAnnotation, k: usize) -> Result<SampledAnnotation, AnnotationError> {
    if k == 0 {
        return Err(AnnotationError::InvalidSamplingStep(k));
    }
    let frames: BTreeMap<usize, Vec<Instance>> = dense
        .frames()
        .iter()
        .filter(|(f, _)| *f % k == 0)
        .map(|(&f, v)| (f, v.clone()))
        .collect();
    Ok(SampledAnnotation { step: k, annotation: VideoAnnotation::new(dense.meta.clone(), frames)? })
}

/// Fills the frames between consecutive appearances of each track by
/// moving every corner linearly. Tracks are never extended past their first
/// or last annotated frame.
pub fn interpolate(
    sparse: &VideoAnnotation,
    frame_count: usize,
) -> Result<VideoAnnotation, AnnotationError> {
    if let Some(&last) = sparse.frames().keys().next_back() {
        if last >= frame_count {
            return Err(AnnotationError::OutOfRangeFrameIndex { frame: last, frame_count });
        }
    }
    let meta = VideoMeta { frame_count, ..sparse.meta.clone() };
    let mut out = VideoAnnotation::new(meta, sparse.frames().clone())?;

    let mut generated: Vec<(usize, Instance)> = Vec::new();
    for (track_id, appearances) in sparse.tracks() {
        for pair in appearances.windows(2) {
            let ((f0, a), (f1, b)) = (pair[0], pair[1]);
            let span = f1 - f0;
            if span < 2 {
                continue;
            }
            let err = || AnnotationError::CornerCorrespondence { track_id, from: f0, to: f1 };
            let mid = lerp_corners(&a.quad, &b.quad, 0.5);
            if signed_area(&mid) <= 0.0 || Quad::new(mid).is_err() {
                return Err(err());
            }
            for j in 1..span {
                let t = j as f64 / span as f64;
                let quad = Quad::new(lerp_corners(&a.quad, &b.quad, t)).map_err(|_| err())?;
                let mut inst = Instance::new(track_id, quad, a.transcription().map(str::to_owned), a.category);
                inst.score = a.score;
                generated.push((f0 + j, inst));
            }
        }
    }
    let frames = out.frames_mut();
    for (f, inst) in generated {
        frames.entry(f).or_default().push(inst);
    }
    for v in frames.values_mut() {
        v.sort_by_key(|i| i.track_id);
    }
    Ok(out)
}

fn lerp_corners(a: &Quad, b: &Quad, t: f64) -> [Point2; 4] {
    let (ca, cb) = (a.corners(), b.corners());
    std::array::from_fn(|i| ca[i].lerp(cb[i], t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(x0: f64) -> Quad {
        Quad::from_flat(&[x0, 0.0, x0 + 4.0, 0.0, x0 + 4.0, 2.0, x0, 2.0]).unwrap()
    }

    fn video(frames: Vec<(usize, Quad)>, frame_count: usize) -> VideoAnnotation {
        let frames = frames
            .into_iter()
            .map(|(f, q)| (f, vec![Instance::new(1, q, Some("t".into()), None)]))
            .collect();
        VideoAnnotation::new(VideoMeta::new("v", 100, 100, frame_count), frames).unwrap()
    }

    #[test]
    fn sample_keeps_multiples() {
        let v = video((0..10).map(|f| (f, quad(f as f64))).collect(), 10);
        let s = sample(&v, 3).unwrap();
        assert_eq!(s.annotation().frames().keys().copied().collect::<Vec<_>>(), vec![0, 3, 6, 9]);
        assert_eq!(sample(&v, 1).unwrap().into_annotation(), v);
        assert_eq!(sample(&v, 10).unwrap().annotation().frames().len(), 1);
        assert!(matches!(sample(&v, 0), Err(AnnotationError::InvalidSamplingStep(0))));
    }

    #[test]
    fn constant_quad_is_copied() {
        let v = video(vec![(0, quad(5.0)), (3, quad(5.0))], 4);
        let d = interpolate(&v, 4).unwrap();
        for f in 0..4 {
            assert_eq!(d.frame(f)[0].quad, quad(5.0));
        }
    }

    #[test]
    fn corner_moves_linearly() {
        let a = Quad::from_flat(&[10.0, 0.0, 20.0, 0.0, 20.0, 5.0, 10.0, 5.0]).unwrap();
        let b = Quad::from_flat(&[16.0, 0.0, 20.0, 0.0, 20.0, 5.0, 10.0, 5.0]).unwrap();
        let d = interpolate(&video(vec![(0, a), (3, b)], 4), 4).unwrap();
        assert!((d.frame(1)[0].quad.corners()[0].x - 12.0).abs() < 1e-12);
        assert!((d.frame(2)[0].quad.corners()[0].x - 14.0).abs() < 1e-12);
        assert_eq!(d.frame(2)[0].transcription(), Some("t"));
    }

    #[test]
    fn no_extrapolation() {
        let d = interpolate(&video(vec![(3, quad(0.0)), (6, quad(3.0))], 10), 10).unwrap();
        assert_eq!(d.frames().keys().copied().collect::<Vec<_>>(), vec![3, 4, 5, 6]);
        assert_eq!(d.meta.frame_count, 10);
    }

    #[test]
    fn rotated_corner_order_detected() {
        // Same rectangle, corner list rotated by two: every corner swaps with
        // its opposite and the midpoint collapses.
        let a = quad(0.0);
        let c = a.corners();
        let b = Quad::new([c[2], c[3], c[0], c[1]]).unwrap();
        assert!(matches!(
            interpolate(&video(vec![(0, a), (3, b)], 4), 4),
            Err(AnnotationError::CornerCorrespondence { track_id: 1, from: 0, to: 3 })
        ));
    }

    #[test]
    fn frame_count_must_cover_input() {
        let v = video(vec![(0, quad(0.0)), (3, quad(3.0))], 4);
        assert!(matches!(interpolate(&v, 3), Err(AnnotationError::OutOfRangeFrameIndex { .. })));
    }
}
