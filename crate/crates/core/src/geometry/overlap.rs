//! IoU and generalized IoU for rotated boxes and quads.

use super::clip::{convex_hull, intersect_convex, polygon_area};
use super::{quad_to_rotated, rotated_to_quad, GeometryError, Point2, Quad, RotatedBox};
use crate::exec::Execution;

fn iou_of(a: &[Point2], area_a: f64, b: &[Point2], area_b: f64) -> f64 {
    let inter = polygon_area(&intersect_convex(a, b));
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

pub fn iou(a: &RotatedBox, b: &RotatedBox) -> f64 {
    if a == b {
        return 1.0;
    }
    iou_of(&a.corners(), a.area(), &b.corners(), b.area())
}

/// IoU minus the fraction of the enclosing region not covered by the union.
///
/// The enclosing region is the convex hull of both corner sets, so a box
/// compared with itself scores exactly 1 whatever its orientation.
pub fn giou(a: &RotatedBox, b: &RotatedBox) -> f64 {
    if a == b {
        return 1.0;
    }
    let (ca, cb) = (a.corners(), b.corners());
    let inter = polygon_area(&intersect_convex(&ca, &cb));
    let union = a.area() + b.area() - inter;
    let all: Vec<Point2> = ca.iter().chain(cb.iter()).copied().collect();
    let hull = polygon_area(&convex_hull(&all));
    let iou = if union > 0.0 { (inter / union).clamp(0.0, 1.0) } else { 0.0 };
    if hull <= 0.0 {
        return iou;
    }
    iou - ((hull - union) / hull).max(0.0)
}

/// IoU of two convex quads.
pub fn quad_iou(a: &Quad, b: &Quad) -> Result<f64, GeometryError> {
    if a == b {
        return Ok(1.0);
    }
    if !a.is_convex() || !b.is_convex() {
        return Err(GeometryError::NonConvexInput);
    }
    Ok(iou_of(a.corners(), a.area(), b.corners(), b.area()))
}

/// IoU for annotation regions of any shape the schema admits: convex quads
/// are clipped directly, a non-convex quad is replaced by its minimum-area
/// enclosing rectangle, and degenerate quads overlap nothing.
pub fn region_iou(a: &Quad, b: &Quad) -> f64 {
    if a == b {
        return 1.0;
    }
    let convexify = |q: &Quad| -> Option<Quad> {
        if q.is_convex() {
            Some(*q)
        } else {
            quad_to_rotated(q).ok().map(|r| rotated_to_quad(&r))
        }
    };
    match (convexify(a), convexify(b)) {
        (Some(a), Some(b)) => iou_of(a.corners(), a.area(), b.corners(), b.area()),
        _ => 0.0,
    }
}

/// Row-major `a.len() × b.len()` IoU table.
pub fn iou_matrix(a: &[RotatedBox], b: &[RotatedBox], exec: Execution) -> Vec<Vec<f64>> {
    exec.map(a, |x| b.iter().map(|y| iou(x, y)).collect())
}
