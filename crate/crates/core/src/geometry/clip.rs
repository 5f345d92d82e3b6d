//! Convex clipping and polygon utilities.

use super::{GeometryError, Point2, Quad, GEOM_EPS};

/// Shoelace area, positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Point2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        acc += p.x * q.y - q.x * p.y;
    }
    acc / 2.0
}

pub fn polygon_area(poly: &[Point2]) -> f64 {
    signed_area(poly).abs()
}

/// Convexity test for a counter-clockwise polygon. Turns are compared by the
/// sine of the turning angle so the tolerance does not depend on scale.
pub(crate) fn is_convex_ccw(poly: &[Point2]) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let e1 = poly[(i + 1) % n].sub(poly[i]);
        let e2 = poly[(i + 2) % n].sub(poly[(i + 1) % n]);
        let scale = e1.norm() * e2.norm();
        scale == 0.0 || e1.cross(e2) >= -GEOM_EPS * scale
    })
}

/// Andrew's monotone chain. Returns the hull counter-clockwise without
/// collinear points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if b.sub(a).cross(p.sub(a)) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Sutherland–Hodgman: clips `subject` by every edge of the convex,
/// counter-clockwise `clip` polygon.
pub(crate) fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut output: Vec<Point2> = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let edge = clip[(i + 1) % clip.len()].sub(a);
        let len = edge.norm();
        if len == 0.0 {
            continue;
        }
        // Signed distance to the clip line, positive inside.
        let side = |p: Point2| edge.cross(p.sub(a)) / len;
        let input = std::mem::take(&mut output);
        let mut prev = *input.last().expect("non-empty");
        let mut prev_side = side(prev);
        for &cur in &input {
            let cur_side = side(cur);
            let cur_in = cur_side >= -GEOM_EPS;
            let prev_in = prev_side >= -GEOM_EPS;
            if cur_in {
                if !prev_in {
                    output.push(prev.lerp(cur, prev_side / (prev_side - cur_side)));
                }
                output.push(cur);
            } else if prev_in {
                output.push(prev.lerp(cur, prev_side / (prev_side - cur_side)));
            }
            prev = cur;
            prev_side = cur_side;
        }
    }
    output.dedup_by(|a, b| (a.x - b.x).abs() <= GEOM_EPS && (a.y - b.y).abs() <= GEOM_EPS);
    while output.len() > 1 {
        let (f, l) = (output[0], output[output.len() - 1]);
        if (f.x - l.x).abs() <= GEOM_EPS && (f.y - l.y).abs() <= GEOM_EPS {
            output.pop();
        } else {
            break;
        }
    }
    output
}

/// Intersection of two convex quads as a counter-clockwise polygon; empty
/// when they are disjoint or only touch.
pub fn polygon_intersection(a: &Quad, b: &Quad) -> Result<Vec<Point2>, GeometryError> {
    if !a.is_convex() || !b.is_convex() {
        return Err(GeometryError::NonConvexInput);
    }
    Ok(intersect_convex(a.corners(), b.corners()))
}

pub(crate) fn intersect_convex(a: &[Point2], b: &[Point2]) -> Vec<Point2> {
    if a == b {
        return a.to_vec();
    }
    let poly = clip_convex(a, b);
    if poly.len() < 3 || signed_area(&poly) <= 0.0 {
        Vec::new()
    } else {
        poly
    }
}
