//! Rotated-rectangle and quadrilateral geometry.
//!
//! Everything here is unit-agnostic: coordinates may be pixels or
//! image-relative fractions as long as both operands agree. Quadrilaterals
//! are stored counter-clockwise (positive shoelace area in a y-up frame, or
//! clockwise on screen when y points down; the algebra does not care).

mod clip;
mod overlap;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clip::{convex_hull, polygon_area, polygon_intersection, signed_area};
pub use overlap::{giou, iou, iou_matrix, quad_iou, region_iou};

/// Absolute tolerance for geometric degeneracy tests.
pub const GEOM_EPS: f64 = 1e-9;

/// Quads with less area than this (squared input units) cannot define a box.
pub const MIN_QUAD_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("box extent must be strictly positive (w={w}, h={h})")]
    NonPositiveExtent { w: f64, h: f64 },
    #[error("quadrilateral is self-intersecting")]
    SelfIntersecting,
    #[error("quadrilateral area {area:e} is below {MIN_QUAD_AREA:e}")]
    DegenerateQuad { area: f64 },
    #[error("polygon clipping requires convex input")]
    NonConvexInput,
    #[error("expected 8 coordinates, got {0}")]
    WrongCoordinateCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    #[inline]
    pub(crate) fn sub(self, o: Self) -> Self {
        Self { x: self.x - o.x, y: self.y - o.y }
    }

    #[inline]
    pub(crate) fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub(crate) fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub(crate) fn lerp(self, o: Self, t: f64) -> Self {
        Self { x: self.x + (o.x - self.x) * t, y: self.y + (o.y - self.y) * t }
    }
}

/// A simple quadrilateral with counter-clockwise corner order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    corners: [Point2; 4],
}

impl Quad {
    /// Validates finiteness and simplicity. Clockwise input is reversed in
    /// place (keeping the first corner) so the stored order is always
    /// counter-clockwise.
    pub fn new(corners: [Point2; 4]) -> Result<Self, GeometryError> {
        if corners.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(GeometryError::NonFinite);
        }
        let [a, b, c, d] = corners;
        if segments_cross(a, b, c, d) || segments_cross(b, c, d, a) {
            return Err(GeometryError::SelfIntersecting);
        }
        if signed_area(&corners) < 0.0 {
            Ok(Self { corners: [a, d, c, b] })
        } else {
            Ok(Self { corners })
        }
    }

    /// Builds a quad from `[x1, y1, ..., x4, y4]`.
    pub fn from_flat(coords: &[f64]) -> Result<Self, GeometryError> {
        if coords.len() != 8 {
            return Err(GeometryError::WrongCoordinateCount(coords.len()));
        }
        let p = |i: usize| Point2 { x: coords[2 * i], y: coords[2 * i + 1] };
        Self::new([p(0), p(1), p(2), p(3)])
    }

    pub(crate) fn from_ccw_unchecked(corners: [Point2; 4]) -> Self {
        Self { corners }
    }

    pub fn corners(&self) -> &[Point2; 4] {
        &self.corners
    }

    pub fn to_flat(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (i, p) in self.corners.iter().enumerate() {
            out[2 * i] = p.x;
            out[2 * i + 1] = p.y;
        }
        out
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.corners)
    }

    /// True when every turn is a left turn (collinear corners allowed).
    pub fn is_convex(&self) -> bool {
        clip::is_convex_ccw(&self.corners)
    }

    pub fn bounds(&self) -> AABox {
        AABox::from_points(&self.corners).expect("quad has corners")
    }
}

/// Proper crossing of segments `p1p2` and `p3p4` (shared endpoints and
/// collinear touching do not count).
fn segments_cross(p1: Point2, p2: Point2, p3: Point2, p4: Point2) -> bool {
    let d1 = p2.sub(p1).cross(p3.sub(p1));
    let d2 = p2.sub(p1).cross(p4.sub(p1));
    let d3 = p4.sub(p3).cross(p1.sub(p3));
    let d4 = p4.sub(p3).cross(p2.sub(p3));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Oriented rectangle in center form. `w` runs along `angle`, `h` across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    angle: f64,
}

impl RotatedBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, angle: f64) -> Result<Self, GeometryError> {
        if ![cx, cy, w, h, angle].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(GeometryError::NonPositiveExtent { w, h });
        }
        Ok(Self { cx, cy, w, h, angle: canonical_angle(angle) })
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Corners in counter-clockwise order, starting at the
    /// (−w/2, −h/2) corner of the box frame.
    pub fn corners(&self) -> [Point2; 4] {
        let (s, c) = self.angle.sin_cos();
        let (hw, hh) = (self.w / 2.0, self.h / 2.0);
        let at = |a: f64, b: f64| Point2 {
            x: self.cx + a * hw * c - b * hh * s,
            y: self.cy + a * hw * s + b * hh * c,
        };
        [at(-1.0, -1.0), at(1.0, -1.0), at(1.0, 1.0), at(-1.0, 1.0)]
    }

    /// Same box expressed with the other edge as the reference axis.
    pub fn swap_axes(&self) -> Self {
        Self {
            cx: self.cx,
            cy: self.cy,
            w: self.h,
            h: self.w,
            angle: canonical_angle(self.angle + FRAC_PI_2),
        }
    }

    /// Geometric equality: same rectangle regardless of which edge is the
    /// reference axis and of the π-periodicity of the angle.
    pub fn same_rect(&self, other: &Self, tol: f64) -> bool {
        let direct = |o: &Self| {
            (self.cx - o.cx).abs() <= tol
                && (self.cy - o.cy).abs() <= tol
                && (self.w - o.w).abs() <= tol
                && (self.h - o.h).abs() <= tol
                && angle_distance_mod_pi(self.angle, o.angle) <= tol
        };
        direct(other) || direct(&other.swap_axes())
    }

    /// Uniformly scales centre and extents, e.g. to convert pixel boxes to
    /// image-relative ones.
    pub fn scaled(&self, sx: f64, sy: f64) -> Result<Self, GeometryError> {
        Self::new(self.cx * sx, self.cy * sy, self.w * sx, self.h * sy, self.angle)
    }
}

/// Wraps an angle into `[-π/2, π/2)`.
pub fn canonical_angle(angle: f64) -> f64 {
    let mut a = angle - PI * ((angle + FRAC_PI_2) / PI).floor();
    if a >= FRAC_PI_2 {
        a -= PI;
    }
    if a < -FRAC_PI_2 {
        a += PI;
    }
    a
}

/// Distance between two orientations modulo π, in `[0, π/2]`.
pub fn angle_distance_mod_pi(a: f64, b: f64) -> f64 {
    canonical_angle(a - b).abs()
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AABox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl AABox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Option<Self> {
        (xmin <= xmax && ymin <= ymax).then_some(Self { xmin, ymin, xmax, ymax })
    }

    pub fn from_points(points: &[Point2]) -> Option<Self> {
        let first = points.first()?;
        Some(points.iter().fold(
            Self { xmin: first.x, ymin: first.y, xmax: first.x, ymax: first.y },
            |b, p| Self {
                xmin: b.xmin.min(p.x),
                ymin: b.ymin.min(p.y),
                xmax: b.xmax.max(p.x),
                ymax: b.ymax.max(p.y),
            },
        ))
    }

    pub fn union(&self, o: &Self) -> Self {
        Self {
            xmin: self.xmin.min(o.xmin),
            ymin: self.ymin.min(o.ymin),
            xmax: self.xmax.max(o.xmax),
            ymax: self.ymax.max(o.ymax),
        }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }
}

pub fn rotated_to_quad(b: &RotatedBox) -> Quad {
    Quad::from_ccw_unchecked(b.corners())
}

/// Minimum-area enclosing rectangle of `q`, with `w` along the longest edge.
///
/// The candidate orientations are the edges of the convex hull (rotating
/// calipers). For squares the orientation whose canonical angle is closest
/// to zero wins; an exact ±π/4 tie resolves to −π/4.
pub fn quad_to_rotated(q: &Quad) -> Result<RotatedBox, GeometryError> {
    let area = q.area().abs();
    if area < MIN_QUAD_AREA {
        return Err(GeometryError::DegenerateQuad { area });
    }
    let hull = convex_hull(q.corners());

    let mut best: Option<(f64, f64, f64, f64, f64, f64)> = None; // area, theta, u0, u1, v0, v1
    for i in 0..hull.len() {
        let e = hull[(i + 1) % hull.len()].sub(hull[i]);
        let len = e.norm();
        if len <= GEOM_EPS * 1e-3 {
            continue;
        }
        let (ux, uy) = (e.x / len, e.y / len);
        let (mut u0, mut u1, mut v0, mut v1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &hull {
            let pu = p.x * ux + p.y * uy;
            let pv = -p.x * uy + p.y * ux;
            u0 = u0.min(pu);
            u1 = u1.max(pu);
            v0 = v0.min(pv);
            v1 = v1.max(pv);
        }
        let a = (u1 - u0) * (v1 - v0);
        if best.is_none_or(|b| a < b.0) {
            best = Some((a, uy.atan2(ux), u0, u1, v0, v1));
        }
    }
    let (_, theta, u0, u1, v0, v1) = best.ok_or(GeometryError::DegenerateQuad { area })?;

    let (s, c) = theta.sin_cos();
    let (mu, mv) = ((u0 + u1) / 2.0, (v0 + v1) / 2.0);
    let cx = mu * c - mv * s;
    let cy = mu * s + mv * c;
    let (lu, lv) = (u1 - u0, v1 - v0);

    let is_square = (lu - lv).abs() <= GEOM_EPS * lu.max(lv);
    let (w, h, angle) = if is_square {
        let a0 = canonical_angle(theta);
        let a1 = canonical_angle(theta + FRAC_PI_2);
        let pick_first = a0.abs() < a1.abs() || (a0.abs() == a1.abs() && a0 < a1);
        if pick_first {
            (lu, lv, a0)
        } else {
            (lv, lu, a1)
        }
    } else if lu >= lv {
        (lu, lv, theta)
    } else {
        (lv, lu, theta + FRAC_PI_2)
    };
    RotatedBox::new(cx, cy, w, h, angle)
}
