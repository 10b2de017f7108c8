//! Euclidean primitives over points, timed segments and boxes.
//!
//! Segments carry integer tick timestamps on their endpoints so the same type
//! serves both the purely spatial distances (point/segment, segment/segment,
//! box/box) and the time-synchronised distance between two objects moving
//! linearly along their segments.

use core::fmt;

use crate::trajectory::Tick;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("bounding box of an empty segment set")]
    Empty,
    #[error("time {t} outside segment interval [{start}, {end}]")]
    OutsideInterval { t: f64, start: Tick, end: Tick },
    #[error("segments do not share any time")]
    DisjointIntervals,
}

/// A location in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    /// `self + s * (to - self)`
    pub fn lerp(self, to: Point2, s: f64) -> Point2 {
        Point2::new(self.x + s * (to.x - self.x), self.y + s * (to.y - self.y))
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A straight movement from `start` at `t_start` to `end` at `t_end`.
///
/// `t_start == t_end` is admitted for single-sample trajectories; such a
/// segment is a stationary point that exists for one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedSegment {
    pub start: Point2,
    pub end: Point2,
    pub t_start: Tick,
    pub t_end: Tick,
}

impl TimedSegment {
    pub fn new(start: Point2, t_start: Tick, end: Point2, t_end: Tick) -> Self {
        debug_assert!(t_start <= t_end);
        Self { start, end, t_start, t_end }
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox {
            min: Point2::new(self.start.x.min(self.end.x), self.start.y.min(self.end.y)),
            max: Point2::new(self.start.x.max(self.end.x), self.start.y.max(self.end.y)),
        }
    }

    /// Closed-interval overlap of the two time spans.
    pub fn common_interval(&self, other: &TimedSegment) -> Option<(Tick, Tick)> {
        let lo = self.t_start.max(other.t_start);
        let hi = self.t_end.min(other.t_end);
        (lo <= hi).then_some((lo, hi))
    }

    pub fn covers(&self, t: Tick) -> bool {
        self.t_start <= t && t <= self.t_end
    }

    fn velocity(&self) -> Point2 {
        if self.t_end == self.t_start {
            return Point2::default();
        }
        let dt = f64::from(self.t_end - self.t_start);
        Point2::new((self.end.x - self.start.x) / dt, (self.end.y - self.start.y) / dt)
    }
}

/// Axis-aligned box; `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

impl BoundingBox {
    pub fn contains(&self, p: Point2) -> bool {
        self.min.x <= p.x && p.x <= self.max.x && self.min.y <= p.y && p.y <= self.max.y
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            min: Point2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }
}

pub fn dist_pp(a: Point2, b: Point2) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    libm::sqrt(dx * dx + dy * dy)
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return dist_pp(p, a);
    }
    let s = p.sub(a).dot(ab) / len2;
    if s <= 0.0 {
        dist_pp(p, a)
    } else if s >= 1.0 {
        dist_pp(p, b)
    } else {
        dist_pp(p, a.lerp(b, s))
    }
}

pub fn dist_ps(p: Point2, l: &TimedSegment) -> f64 {
    point_segment_distance(p, l.start, l.end)
}

fn orientation(a: Point2, b: Point2, c: Point2) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn within_box(a: Point2, b: Point2, p: Point2) -> bool {
    a.x.min(b.x) <= p.x && p.x <= a.x.max(b.x) && a.y.min(b.y) <= p.y && p.y <= a.y.max(b.y)
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && within_box(q1, q2, p1))
        || (d2 == 0.0 && within_box(q1, q2, p2))
        || (d3 == 0.0 && within_box(p1, p2, q1))
        || (d4 == 0.0 && within_box(p1, p2, q2))
}

/// Shortest distance between any two points of the two segments, ignoring time.
pub fn dist_ss(a: &TimedSegment, b: &TimedSegment) -> f64 {
    if segments_intersect(a.start, a.end, b.start, b.end) {
        return 0.0;
    }
    point_segment_distance(a.start, b.start, b.end)
        .min(point_segment_distance(a.end, b.start, b.end))
        .min(point_segment_distance(b.start, a.start, a.end))
        .min(point_segment_distance(b.end, a.start, a.end))
}

pub fn mbb(segments: &[TimedSegment]) -> Result<BoundingBox, GeometryError> {
    let (first, rest) = segments.split_first().ok_or(GeometryError::Empty)?;
    Ok(rest.iter().fold(first.bbox(), |acc, s| acc.union(&s.bbox())))
}

/// Minimum distance between any pair of points of the two boxes.
pub fn dist_bb(u: &BoundingBox, v: &BoundingBox) -> f64 {
    let dx = (v.min.x - u.max.x).max(u.min.x - v.max.x).max(0.0);
    let dy = (v.min.y - u.max.y).max(u.min.y - v.max.y).max(0.0);
    libm::sqrt(dx * dx + dy * dy)
}

/// Position on `l` at time `t`, by linear interpolation between the endpoints.
pub fn location_at(l: &TimedSegment, t: f64) -> Result<Point2, GeometryError> {
    let (u, v) = (f64::from(l.t_start), f64::from(l.t_end));
    if !(u <= t && t <= v) {
        return Err(GeometryError::OutsideInterval { t, start: l.t_start, end: l.t_end });
    }
    if t == u {
        return Ok(l.start);
    }
    if t == v {
        return Ok(l.end);
    }
    Ok(l.start.lerp(l.end, (t - u) / (v - u)))
}

/// Time within the common interval at which the two moving points are closest.
///
/// The squared separation is quadratic in `t`; its unconstrained minimiser is
/// clamped into the common interval. With zero relative velocity the
/// separation is constant and the interval start is returned.
pub fn cpa_time(a: &TimedSegment, b: &TimedSegment) -> Result<f64, GeometryError> {
    let (lo, hi) = a.common_interval(b).ok_or(GeometryError::DisjointIntervals)?;
    let (lo, hi) = (f64::from(lo), f64::from(hi));
    let pa = location_at(a, lo)?;
    let pb = location_at(b, lo)?;
    let d0 = pa.sub(pb);
    let w = a.velocity().sub(b.velocity());
    let w2 = w.dot(w);
    if w2 == 0.0 {
        return Ok(lo);
    }
    Ok((lo - d0.dot(w) / w2).clamp(lo, hi))
}

/// Distance between the two moving points at their closest approach, or
/// `f64::INFINITY` when the segments share no time.
pub fn dist_star(a: &TimedSegment, b: &TimedSegment) -> f64 {
    let Ok(t) = cpa_time(a, b) else {
        return f64::INFINITY;
    };
    match (location_at(a, t), location_at(b, t)) {
        (Ok(pa), Ok(pb)) => dist_pp(pa, pb),
        _ => f64::INFINITY,
    }
}
