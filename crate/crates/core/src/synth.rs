//! Deterministic synthetic video-text worlds.
//!
//! Each object lives in its own horizontal lane so that ground-truth boxes of
//! different objects never overlap. Detections copy the ground-truth corners
//! plus Gaussian noise, lose their track ids, and are dropped independently
//! with probability `drop_prob`.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::annotations::{
    Detection, DetectionSet, FrameDetections, Instance, TextCategory, VideoAnnotation, VideoMeta,
};
use crate::exec::Execution;
use crate::geometry::{quad_to_rotated, Point2, Quad};

const LANE_SPACING: f64 = 160.0;
const WORDS: [&str; 12] = [
    "EXIT", "OPEN", "SALE", "NEWS", "HOTEL", "Coffee", "Bus 42", "视频", "文本", "欢迎光临", "Live", "SCORE 3:1",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    Static,
    ConstantVelocity,
    Rotate,
}

impl FromStr for Motion {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "static" => Ok(Self::Static),
            "constant_velocity" => Ok(Self::ConstantVelocity),
            "rotate" => Ok(Self::Rotate),
            other => Err(SynthError::InvalidConfig(format!("unknown motion {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_objects: usize,
    pub n_frames: usize,
    pub motion: Motion,
    /// Standard deviation of the per-corner noise, in pixels.
    pub noise_sigma: f64,
    pub drop_prob: f64,
    pub seed: u64,
    pub video_id: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_objects: 4,
            n_frames: 30,
            motion: Motion::ConstantVelocity,
            noise_sigma: 0.0,
            drop_prob: 0.0,
            seed: 0,
            video_id: "synth".into(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_objects == 0 {
            return Err(SynthError::InvalidConfig("n_objects must be at least 1".into()));
        }
        if self.n_frames < 2 {
            return Err(SynthError::InvalidConfig("n_frames must be at least 2".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SynthError::InvalidConfig(format!("noise_sigma {} must be >= 0", self.noise_sigma)));
        }
        if !(0.0..1.0).contains(&self.drop_prob) {
            return Err(SynthError::InvalidConfig(format!("drop_prob {} not in [0, 1)", self.drop_prob)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthVideo {
    pub ground_truth: VideoAnnotation,
    pub detections: DetectionSet,
}

struct Object {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    angle: f64,
    vx: f64,
    vy: f64,
    omega: f64,
    text: &'static str,
    category: TextCategory,
}

impl Object {
    /// Corners at frame `t`, counter-clockwise, following the unwrapped
    /// angle so that corner order never jumps.
    fn corners(&self, t: usize) -> [Point2; 4] {
        let t = t as f64;
        let (cx, cy, a) = (self.cx + self.vx * t, self.cy + self.vy * t, self.angle + self.omega * t);
        let (s, c) = a.sin_cos();
        let (hw, hh) = (self.w / 2.0, self.h / 2.0);
        [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
            .map(|(x, y)| Point2 { x: cx + x * c - y * s, y: cy + x * s + y * c })
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthVideo, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let objects: Vec<Object> = (0..cfg.n_objects)
        .map(|i| {
            let (vx, vy) = match cfg.motion {
                Motion::ConstantVelocity => (rng.random_range(1.0..3.0), rng.random_range(-0.5..0.5)),
                _ => (0.0, 0.0),
            };
            let omega = match cfg.motion {
                Motion::Rotate => {
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    sign * rng.random_range(0.005..0.015)
                }
                _ => 0.0,
            };
            Object {
                cx: rng.random_range(150.0..400.0),
                cy: 100.0 + LANE_SPACING * i as f64,
                w: rng.random_range(90.0..150.0),
                h: rng.random_range(24.0..36.0),
                angle: rng.random_range(-0.3..0.3),
                vx,
                vy,
                omega,
                text: WORDS[rng.random_range(0..WORDS.len())],
                category: TextCategory::ALL[rng.random_range(0..TextCategory::ALL.len())],
            }
        })
        .collect();

    let noise = (cfg.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, cfg.noise_sigma).expect("sigma validated"));

    let mut gt_frames: BTreeMap<usize, Vec<Instance>> = BTreeMap::new();
    let mut det_frames = Vec::with_capacity(cfg.n_frames);
    let mut max_x: f64 = 0.0;
    let mut max_y: f64 = 0.0;
    for f in 0..cfg.n_frames {
        let mut gts = Vec::with_capacity(objects.len());
        let mut dets = Vec::with_capacity(objects.len());
        for (i, obj) in objects.iter().enumerate() {
            let corners = obj.corners(f);
            for p in &corners {
                max_x = max_x.max(p.x);
                max_y = max_y.max(p.y);
            }
            let quad = Quad::new(corners).expect("rectangles are simple");
            gts.push(Instance::new(i as u64, quad, Some(obj.text.into()), Some(obj.category)));

            // Draws happen whether or not the detection survives, so the
            // stream for one seed does not depend on drop_prob.
            let dropped = rng.random::<f64>() < cfg.drop_prob;
            let score = rng.random_range(0.7..=1.0);
            let det_quad = match &noise {
                Some(n) => noisy_quad(&corners, n, &mut rng).unwrap_or(quad),
                None => quad,
            };
            if dropped {
                continue;
            }
            let bbox = quad_to_rotated(&det_quad).expect("validated quads have positive extent");
            dets.push(Detection {
                quad: det_quad,
                bbox,
                score,
                transcription: Some(obj.text.into()),
                category: Some(obj.category),
            });
        }
        gt_frames.insert(f, gts);
        det_frames.push(FrameDetections::new(f, dets));
    }

    let meta = VideoMeta::new(
        cfg.video_id.clone(),
        (max_x.ceil() as u32 + 50).max(1280),
        (max_y.ceil() as u32 + 50).max(720),
        cfg.n_frames,
    );
    let ground_truth = VideoAnnotation::new(meta.clone(), gt_frames).expect("generated ids are unique");
    Ok(SynthVideo { ground_truth, detections: DetectionSet { meta, frames: det_frames } })
}

/// Jittered corners, redrawn a few times if the jitter folds the quad.
fn noisy_quad(corners: &[Point2; 4], noise: &Normal<f64>, rng: &mut ChaCha8Rng) -> Option<Quad> {
    for _ in 0..8 {
        let jittered = corners.map(|p| Point2 { x: p.x + noise.sample(rng), y: p.y + noise.sample(rng) });
        if let Ok(q) = Quad::new(jittered) {
            if q.is_convex() && quad_to_rotated(&q).is_ok() {
                return Some(q);
            }
        }
    }
    None
}

/// `n_videos` independent videos seeded `cfg.seed, cfg.seed + 1, ...` and
/// named `{video_id}_{index:03}`.
pub fn generate_corpus(cfg: &SynthConfig, n_videos: usize, exec: Execution) -> Result<Vec<SynthVideo>, SynthError> {
    cfg.validate()?;
    exec.map_range(n_videos, |i| {
        generate(&SynthConfig {
            seed: cfg.seed.wrapping_add(i as u64),
            video_id: format!("{}_{i:03}", cfg.video_id),
            ..cfg.clone()
        })
    })
    .into_iter()
    .collect()
}
