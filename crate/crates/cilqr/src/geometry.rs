//! 2D shapes and signed distances for roadway and collision constraints.
//!
//! Distances are signed: positive values are boundary-to-boundary gaps,
//! negative values are penetration depths. The negative side keeps the
//! barrier gradient informative when the nominal trajectory is infeasible.

use std::fmt;

use nalgebra::{Point2, Vector2};

use crate::types::{VehicleSpec, VehicleState};

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    TooFewPoints(usize),
    DuplicatePoint { index: usize },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewPoints(n) => write!(f, "polyline needs at least 2 points, got {n}"),
            Self::DuplicatePoint { index } => {
                write!(f, "polyline points {index} and {} coincide", index + 1)
            }
        }
    }
}

impl std::error::Error for GeometryError {}

/// Rectangle with arbitrary planar pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Point2<f64>,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl OrientedBox {
    pub fn new(center: Point2<f64>, heading: f64, length: f64, width: f64) -> Self {
        Self {
            center,
            heading,
            length,
            width,
        }
    }

    /// Unit axes: longitudinal, lateral.
    pub fn axes(&self) -> (Vector2<f64>, Vector2<f64>) {
        let (s, c) = self.heading.sin_cos();
        (Vector2::new(c, s), Vector2::new(-s, c))
    }

    pub fn corners(&self) -> [Point2<f64>; 4] {
        let (u, v) = self.axes();
        let hl = 0.5 * self.length;
        let hw = 0.5 * self.width;
        [
            self.center + u * hl + v * hw,
            self.center - u * hl + v * hw,
            self.center - u * hl - v * hw,
            self.center + u * hl - v * hw,
        ]
    }

    /// Express a point in the box frame (center at origin, x along heading).
    fn to_local(&self, p: Point2<f64>) -> Point2<f64> {
        let d = p - self.center;
        let (s, c) = self.heading.sin_cos();
        Point2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }

    pub fn contains(&self, p: Point2<f64>) -> bool {
        let q = self.to_local(p);
        q.x.abs() <= 0.5 * self.length && q.y.abs() <= 0.5 * self.width
    }

    /// Half-diagonal; everything farther from the center than this is outside.
    pub fn circumradius(&self) -> f64 {
        0.5 * (self.length * self.length + self.width * self.width).sqrt()
    }
}

/// Ordered point chain, e.g. a lane boundary or centerline.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point2<f64>>,
    /// Whether the vehicle may cross this line (lane marking vs. curb).
    pub crossable: bool,
}

impl Polyline {
    pub fn new(points: Vec<Point2<f64>>, crossable: bool) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::TooFewPoints(points.len()));
        }
        for (i, pair) in points.windows(2).enumerate() {
            if (pair[1] - pair[0]).norm() == 0.0 {
                return Err(GeometryError::DuplicatePoint { index: i });
            }
        }
        Ok(Self { points, crossable })
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2<f64>, Point2<f64>)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    /// Closest-point projection onto the polyline.
    pub fn project(&self, p: Point2<f64>) -> PolylineProjection {
        let mut best = PolylineProjection {
            point: self.points[0],
            tangent: 0.0,
            arc_length: 0.0,
            signed_offset: 0.0,
        };
        let mut best_d2 = f64::INFINITY;
        let mut cum = 0.0;
        for (a, b) in self.segments() {
            let dir = b - a;
            let len2 = dir.norm_squared();
            let t = ((p - a).dot(&dir) / len2).clamp(0.0, 1.0);
            let proj = a + dir * t;
            let d2 = (p - proj).norm_squared();
            if d2 < best_d2 {
                best_d2 = d2;
                let tangent = dir.y.atan2(dir.x);
                let cross = dir.x * (p.y - proj.y) - dir.y * (p.x - proj.x);
                best = PolylineProjection {
                    point: proj,
                    tangent,
                    arc_length: cum + t * len2.sqrt(),
                    signed_offset: cross.signum() * d2.sqrt(),
                };
            }
            cum += len2.sqrt();
        }
        best
    }

    pub fn total_length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Point and tangent at a given arc length, clamped to the ends.
    pub fn point_at(&self, s: f64) -> (Point2<f64>, f64) {
        let mut remaining = s.max(0.0);
        let mut last = (self.points[0], 0.0);
        for (a, b) in self.segments() {
            let dir = b - a;
            let len = dir.norm();
            let tangent = dir.y.atan2(dir.x);
            if remaining <= len {
                return (a + dir * (remaining / len), tangent);
            }
            remaining -= len;
            last = (b, tangent);
        }
        last
    }
}

/// Result of projecting a point onto a polyline. The offset sign is positive
/// on the left of the travel direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylineProjection {
    pub point: Point2<f64>,
    pub tangent: f64,
    pub arc_length: f64,
    pub signed_offset: f64,
}

/// Vehicle bounding box for a given state: the state anchors the rear axle,
/// the box center sits `box_ref_offset` ahead along the heading.
pub fn box_footprint(state: &VehicleState, spec: &VehicleSpec) -> OrientedBox {
    let (s, c) = state.theta.sin_cos();
    OrientedBox::new(
        Point2::new(
            state.x + spec.box_ref_offset * c,
            state.y + spec.box_ref_offset * s,
        ),
        state.theta,
        spec.length,
        spec.width,
    )
}

fn point_segment_distance(p: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    let dir = b - a;
    let len2 = dir.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&dir) / len2).clamp(0.0, 1.0);
    (p - (a + dir * t)).norm()
}

fn orient(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point2<f64>, b: Point2<f64>, p: Point2<f64>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(p1: Point2<f64>, q1: Point2<f64>, p2: Point2<f64>, q2: Point2<f64>) -> bool {
    let d1 = orient(p2, q2, p1);
    let d2 = orient(p2, q2, q1);
    let d3 = orient(p1, q1, p2);
    let d4 = orient(p1, q1, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(p2, q2, p1))
        || (d2 == 0.0 && on_segment(p2, q2, q1))
        || (d3 == 0.0 && on_segment(p1, q1, p2))
        || (d4 == 0.0 && on_segment(p1, q1, q2))
}

fn segment_segment_distance(
    p1: Point2<f64>,
    q1: Point2<f64>,
    p2: Point2<f64>,
    q2: Point2<f64>,
) -> f64 {
    if segments_intersect(p1, q1, p2, q2) {
        return 0.0;
    }
    point_segment_distance(p1, p2, q2)
        .min(point_segment_distance(q1, p2, q2))
        .min(point_segment_distance(p2, p1, q1))
        .min(point_segment_distance(q2, p1, q1))
}

/// Liang-Barsky clip of the parametric segment `a + s (b - a)`, s in [0, 1],
/// against the axis-aligned rectangle |x| <= hl, |y| <= hw.
fn clip_segment_local(a: Point2<f64>, b: Point2<f64>, hl: f64, hw: f64) -> Option<(f64, f64)> {
    let d = b - a;
    let mut s0 = 0.0_f64;
    let mut s1 = 1.0_f64;
    // Each constraint: p + s q <= 0.
    let tests = [
        (d.x, a.x - hl),
        (-d.x, -a.x - hl),
        (d.y, a.y - hw),
        (-d.y, -a.y - hw),
    ];
    for (q, p) in tests {
        // p + s q <= 0  <=>  s q <= -p
        if q == 0.0 {
            if p > 0.0 {
                return None;
            }
        } else {
            let r = -p / q;
            if q > 0.0 {
                s1 = s1.min(r);
            } else {
                s0 = s0.max(r);
            }
        }
    }
    if s0 <= s1 {
        Some((s0, s1))
    } else {
        None
    }
}

/// Maximum of `min_i (alpha_i + beta_i s)` over `s in [s0, s1]`.
///
/// The lower envelope of affine functions is concave, so the maximum sits at
/// an interval end or at a crossing of two of the lines.
fn max_of_affine_min(affines: &[(f64, f64)], s0: f64, s1: f64) -> f64 {
    let eval = |s: f64| {
        affines
            .iter()
            .map(|(al, be)| al + be * s)
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = eval(s0).max(eval(s1));
    for i in 0..affines.len() {
        for j in (i + 1)..affines.len() {
            let (a_i, b_i) = affines[i];
            let (a_j, b_j) = affines[j];
            if b_i != b_j {
                let s = (a_j - a_i) / (b_i - b_j);
                if s > s0 && s < s1 {
                    best = best.max(eval(s));
                }
            }
        }
    }
    best
}

/// Signed distance between an oriented box and a polyline.
///
/// Positive: smallest gap between the box boundary and any segment.
/// Negative: minus the largest depth reached inside the box by any segment.
pub fn box_to_polyline_distance(bbox: &OrientedBox, line: &Polyline) -> f64 {
    let hl = 0.5 * bbox.length;
    let hw = 0.5 * bbox.width;
    let circum = bbox.circumradius();

    let mut max_depth: Option<f64> = None;
    let mut min_dist = f64::INFINITY;

    let local_corners = [
        Point2::new(hl, hw),
        Point2::new(-hl, hw),
        Point2::new(-hl, -hw),
        Point2::new(hl, -hw),
    ];

    for (a, b) in line.segments() {
        let la = bbox.to_local(a);
        let lb = bbox.to_local(b);

        // Fast reject: the segment cannot beat the current best.
        let center_gap = point_segment_distance(Point2::origin(), la, lb) - circum;
        if max_depth.is_none() && center_gap > min_dist {
            continue;
        }

        if center_gap <= 0.0 {
            if let Some((s0, s1)) = clip_segment_local(la, lb, hl, hw) {
                let d = lb - la;
                // Depth inside the rectangle is the min of four affine
                // functions of the segment parameter.
                let affines = [
                    (hl - la.x, -d.x),
                    (hl + la.x, d.x),
                    (hw - la.y, -d.y),
                    (hw + la.y, d.y),
                ];
                let depth = max_of_affine_min(&affines, s0, s1);
                max_depth = Some(max_depth.map_or(depth, |m: f64| m.max(depth)));
                continue;
            }
        }

        if max_depth.is_none() {
            for w in local_corners.windows(2) {
                min_dist = min_dist.min(segment_segment_distance(w[0], w[1], la, lb));
            }
            min_dist = min_dist.min(segment_segment_distance(
                local_corners[3],
                local_corners[0],
                la,
                lb,
            ));
        }
    }

    match max_depth {
        Some(depth) if depth > 0.0 => -depth,
        Some(_) => 0.0,
        None => min_dist,
    }
}

/// Signed distance between two oriented boxes.
///
/// Positive: smallest boundary-to-boundary gap. Negative: minus the
/// separating-axis penetration depth (the smallest translation that would
/// separate them).
pub fn box_to_box_distance(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let (ua, va) = a.axes();
    let (ub, vb) = b.axes();
    let delta = b.center - a.center;

    let mut min_overlap = f64::INFINITY;
    let mut separated = false;
    for axis in [ua, va, ub, vb] {
        let ra = 0.5 * a.length * ua.dot(&axis).abs() + 0.5 * a.width * va.dot(&axis).abs();
        let rb = 0.5 * b.length * ub.dot(&axis).abs() + 0.5 * b.width * vb.dot(&axis).abs();
        let overlap = ra + rb - delta.dot(&axis).abs();
        if overlap <= 0.0 {
            separated = true;
            break;
        }
        min_overlap = min_overlap.min(overlap);
    }
    if !separated {
        return -min_overlap;
    }

    let ca = a.corners();
    let cb = b.corners();
    let mut min_dist = f64::INFINITY;
    for i in 0..4 {
        let (a0, a1) = (ca[i], ca[(i + 1) % 4]);
        for j in 0..4 {
            let (b0, b1) = (cb[j], cb[(j + 1) % 4]);
            min_dist = min_dist.min(segment_segment_distance(a0, a1, b0, b1));
        }
    }
    min_dist
}
