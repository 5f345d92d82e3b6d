//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's geometry or solver code.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vtspot_core::annotations::{Instance, VideoAnnotation, VideoMeta};
use vtspot_core::geometry::Quad;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// Minimum total cost over every permutation.
pub fn brute_min_cost(cost: &[Vec<f64>]) -> f64 {
    permutations(cost.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Integer version, exact.
pub fn brute_min_cost_int(cost: &[Vec<i64>]) -> i64 {
    permutations(cost.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<i64>())
        .min()
        .unwrap_or(0)
}

/// Best total weight of a partial matching that only uses pairs with
/// `w[i][j] >= gate`, by recursion over rows.
pub fn brute_max_gated(w: &[Vec<f64>], gate: f64) -> f64 {
    fn go(row: usize, w: &[Vec<f64>], gate: f64, used: &mut Vec<bool>) -> f64 {
        if row == w.len() {
            return 0.0;
        }
        let mut best = go(row + 1, w, gate, used);
        for j in 0..used.len() {
            if !used[j] && w[row][j] >= gate {
                used[j] = true;
                best = best.max(w[row][j] + go(row + 1, w, gate, used));
                used[j] = false;
            }
        }
        best
    }
    let cols = w.first().map_or(0, Vec::len);
    go(0, w, gate, &mut vec![false; cols])
}

/// Maximum total of a partial one-to-one assignment on an integer table.
pub fn brute_max_assignment(w: &[Vec<u64>]) -> u64 {
    fn go(row: usize, w: &[Vec<u64>], used: &mut Vec<bool>) -> u64 {
        if row == w.len() {
            return 0;
        }
        let mut best = go(row + 1, w, used);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(w[row][j] + go(row + 1, w, used));
                used[j] = false;
            }
        }
        best
    }
    let cols = w.first().map_or(0, Vec::len);
    go(0, w, &mut vec![false; cols])
}

/// Corners of a rotated rectangle, counter-clockwise.
pub fn rect_corners(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> [(f64, f64); 4] {
    let (s, c) = theta.sin_cos();
    [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)].map(|(a, b)| {
        let (x, y) = (a * w, b * h);
        (cx + x * c - y * s, cy + x * s + y * c)
    })
}

fn inside_convex(poly: &[(f64, f64); 4], x: f64, y: f64) -> bool {
    (0..4).all(|i| {
        let (ax, ay) = poly[i];
        let (bx, by) = poly[(i + 1) % 4];
        (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= 0.0
    })
}

/// Monte Carlo IoU: one uniformly jittered sample in each cell of a
/// `side × side` grid over the joint bounding box.
pub fn monte_carlo_iou(a: &[(f64, f64); 4], b: &[(f64, f64); 4], side: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let xs = a.iter().chain(b).map(|p| p.0);
    let ys = a.iter().chain(b).map(|p| p.1);
    let (x0, x1) = (xs.clone().fold(f64::MAX, f64::min), xs.fold(f64::MIN, f64::max));
    let (y0, y1) = (ys.clone().fold(f64::MAX, f64::min), ys.fold(f64::MIN, f64::max));
    let (dx, dy) = ((x1 - x0) / side as f64, (y1 - y0) / side as f64);
    let (mut inter, mut union) = (0u64, 0u64);
    for i in 0..side {
        for j in 0..side {
            let x = x0 + (i as f64 + r.random::<f64>()) * dx;
            let y = y0 + (j as f64 + r.random::<f64>()) * dy;
            let (ia, ib) = (inside_convex(a, x, y), inside_convex(b, x, y));
            inter += u64::from(ia && ib);
            union += u64::from(ia || ib);
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Shoelace area of a simple polygon given as points.
pub fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0
}

/// Gift-wrapping hull, kept deliberately different from the library's
/// monotone chain.
pub fn jarvis_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let start = points
        .iter()
        .copied()
        .fold(points[0], |m, p| if p.0 < m.0 || (p.0 == m.0 && p.1 < m.1) { p } else { m });
    let mut hull = vec![start];
    let mut cur = start;
    loop {
        let mut next = points[0];
        for &p in points {
            if next == cur {
                next = p;
                continue;
            }
            let cross = (next.0 - cur.0) * (p.1 - cur.1) - (next.1 - cur.1) * (p.0 - cur.0);
            let d = |q: (f64, f64)| (q.0 - cur.0).powi(2) + (q.1 - cur.1).powi(2);
            if cross < 0.0 || (cross == 0.0 && d(p) > d(next)) {
                next = p;
            }
        }
        if next == start || hull.len() > points.len() {
            break;
        }
        hull.push(next);
        cur = next;
    }
    hull
}

pub fn quad_from(c: [(f64, f64); 4]) -> Quad {
    Quad::from_flat(&[c[0].0, c[0].1, c[1].0, c[1].1, c[2].0, c[2].1, c[3].0, c[3].1]).unwrap()
}

pub fn rect_instance(id: u64, x: f64, y: f64, w: f64, h: f64, text: &str) -> Instance {
    Instance::new(id, quad_from(rect_corners(x + w / 2.0, y + h / 2.0, w, h, 0.0)), Some(text.into()), None)
}

pub fn video(id: &str, frame_count: usize, frames: Vec<(usize, Vec<Instance>)>) -> VideoAnnotation {
    let mut map: BTreeMap<usize, Vec<Instance>> = BTreeMap::new();
    for (f, v) in frames {
        map.entry(f).or_default().extend(v);
    }
    VideoAnnotation::new(VideoMeta::new(id, 1920, 1080, frame_count), map).unwrap()
}

/// Dense annotation where every corner moves on a straight line. Tracks
/// start and end on multiples of `k`, so sampling with step `k` keeps both
/// endpoints.
pub fn linear_motion_video(seed: u64, n_tracks: usize, k: usize, frame_count: usize) -> VideoAnnotation {
    let mut r = rng(seed);
    let lattice = (frame_count - 1) / k;
    let mut frames: BTreeMap<usize, Vec<Instance>> = BTreeMap::new();
    for id in 0..n_tracks {
        let a = r.random_range(0..lattice);
        let b = r.random_range(a + 1..=lattice);
        let (start, end) = (a * k, b * k);
        let cx = r.random_range(100.0..1500.0);
        let cy = 60.0 + 120.0 * id as f64;
        let (w, h) = (r.random_range(60.0..200.0), r.random_range(20.0..40.0));
        let theta = r.random_range(-0.6..0.6);
        let base = rect_corners(cx, cy, w, h, theta);
        // Independent corner velocities, small enough to keep the quad simple.
        let vel: [(f64, f64); 4] = std::array::from_fn(|_| (r.random_range(-0.4..0.4), r.random_range(-0.2..0.2)));
        let drift = (r.random_range(-3.0..3.0), r.random_range(-1.0..1.0));
        for f in start..=end {
            let t = (f - start) as f64;
            let c: [(f64, f64); 4] = std::array::from_fn(|i| {
                (base[i].0 + (vel[i].0 + drift.0) * t, base[i].1 + (vel[i].1 + drift.1) * t)
            });
            frames.entry(f).or_default().push(Instance::new(id as u64, quad_from(c), Some(format!("T{id}")), None));
        }
    }
    VideoAnnotation::new(VideoMeta::new(format!("lin{seed}"), 1920, 1080, frame_count), frames).unwrap()
}

/// Largest corner coordinate difference between two annotations with the
/// same frames and ids; `None` if their structure differs.
pub fn max_corner_error(a: &VideoAnnotation, b: &VideoAnnotation) -> Option<f64> {
    if a.frames().keys().ne(b.frames().keys()) {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (f, insts) in a.frames() {
        let other = b.frame(*f);
        if insts.len() != other.len() {
            return None;
        }
        for (x, y) in insts.iter().zip(other) {
            if x.track_id != y.track_id || x.transcription() != y.transcription() {
                return None;
            }
            for (p, q) in x.quad.to_flat().iter().zip(y.quad.to_flat()) {
                worst = worst.max((p - q).abs());
            }
        }
    }
    Some(worst)
}

/// A synthetic video and a tracker-produced prediction for it, with noise,
/// drops and some transcriptions corrupted. Parameters vary with `seed`.
pub fn perturbed_pair(seed: u64) -> (VideoAnnotation, VideoAnnotation) {
    use vtspot_core::synth::{generate, Motion, SynthConfig};
    use vtspot_core::tracker::{run, TrackerConfig};
    let mut r = rng(seed ^ 0x5eed);
    let motion = [Motion::Static, Motion::ConstantVelocity, Motion::Rotate][r.random_range(0..3)];
    let cfg = SynthConfig {
        n_objects: r.random_range(1..6),
        n_frames: r.random_range(5..40),
        motion,
        noise_sigma: r.random_range(0.0..4.0),
        drop_prob: r.random_range(0.0..0.3),
        seed,
        video_id: format!("p{seed}"),
    };
    let v = generate(&cfg).unwrap();
    let tcfg = TrackerConfig { max_age: r.random_range(0..3), ..Default::default() };
    let mut traj = run(&v.detections.frames, tcfg).unwrap();
    let wrong = r.random_range(0.0..0.5);
    for t in &mut traj {
        let whole_track = r.random_bool(0.2);
        for p in t.points.values_mut() {
            if whole_track || r.random_bool(wrong) {
                p.transcription = Some(format!("{}?", p.transcription.as_deref().unwrap_or("")));
            }
        }
    }
    let pred = VideoAnnotation::from_trajectories(v.ground_truth.meta.clone(), &traj).unwrap();
    (v.ground_truth, pred)
}

/// Same annotation with every track id replaced by `map(id)`.
pub fn relabel(v: &VideoAnnotation, map: impl Fn(u64) -> u64) -> VideoAnnotation {
    let frames = v
        .frames()
        .iter()
        .map(|(&f, insts)| {
            let mut insts: Vec<Instance> = insts
                .iter()
                .map(|i| {
                    let mut j = i.clone();
                    j.track_id = map(i.track_id);
                    j
                })
                .collect();
            insts.sort_by_key(|i| i.track_id);
            (f, insts)
        })
        .collect();
    VideoAnnotation::new(v.meta.clone(), frames).unwrap()
}

/// Concatenates videos in time, shifting frames and giving each video its
/// own id range.
pub fn concatenate(videos: &[&VideoAnnotation]) -> VideoAnnotation {
    let total: usize = videos.iter().map(|v| v.meta.frame_count).sum();
    let mut frames: BTreeMap<usize, Vec<Instance>> = BTreeMap::new();
    let mut offset = 0;
    for (k, v) in videos.iter().enumerate() {
        for (&f, insts) in v.frames() {
            frames.insert(
                f + offset,
                insts
                    .iter()
                    .map(|i| {
                        let mut j = i.clone();
                        j.track_id += 1_000_000 * k as u64;
                        j
                    })
                    .collect(),
            );
        }
        offset += v.meta.frame_count;
    }
    VideoAnnotation::new(VideoMeta::new("concat", 1920, 1080, total), frames).unwrap()
}
