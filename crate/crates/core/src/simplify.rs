//! Douglas-Peucker style trajectory simplification.
//!
//! All three simplifiers split recursively on index ranges of the original
//! samples and differ in two places only: how far an interior sample is from
//! the chord, and which out-of-tolerance sample becomes the split point.
//!
//! | simplifier | deviation of sample `p` at time `t` | split point |
//! |------------|-------------------------------------|-------------|
//! | [`Simplifier::Dp`] | distance from `p` to the chord | farthest sample |
//! | [`Simplifier::DpPlus`] | distance from `p` to the chord | out-of-tolerance sample nearest the middle index |
//! | [`Simplifier::DpStar`] | distance from `p` to the chord's position at `t` | farthest sample |
//!
//! Every accepted chord records its actual tolerance: the largest deviation
//! among the samples it replaces. It is computed while testing the chord, so
//! no second pass over the original samples is needed.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::geometry::{dist_pp, dist_ps, location_at, TimedSegment};
use crate::trajectory::{ObjectId, Tick, TimedPoint, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Simplifier {
    Dp,
    DpPlus,
    DpStar,
}

impl Simplifier {
    /// Deviation of `p` from `chord` under this simplifier's metric.
    pub fn deviation(self, p: &TimedPoint, chord: &TimedSegment) -> f64 {
        match self {
            Simplifier::Dp | Simplifier::DpPlus => dist_ps(p.pos(), chord),
            Simplifier::DpStar => match location_at(chord, f64::from(p.t)) {
                Ok(at) => dist_pp(p.pos(), at),
                Err(_) => f64::INFINITY,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Simplifier::Dp => "dp",
            Simplifier::DpPlus => "dp+",
            Simplifier::DpStar => "dp*",
        }
    }
}

impl fmt::Display for Simplifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown simplifier (expected dp, dp+ or dp*)")]
pub struct UnknownSimplifier;

impl FromStr for Simplifier {
    type Err = UnknownSimplifier;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dp" => Ok(Simplifier::Dp),
            "dp+" => Ok(Simplifier::DpPlus),
            "dp*" => Ok(Simplifier::DpStar),
            _ => Err(UnknownSimplifier),
        }
    }
}

/// One segment of a simplified trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub geometry: TimedSegment,
    pub owner: ObjectId,
    /// Largest deviation of an original sample covered by this segment.
    pub actual_tolerance: f64,
    /// Position within the owner's simplified trajectory.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplifiedTrajectory {
    pub owner: ObjectId,
    pub simplifier: Simplifier,
    pub segments: Vec<Segment>,
    /// Sample count of the original trajectory.
    pub original_len: usize,
}

impl SimplifiedTrajectory {
    pub fn start(&self) -> Tick {
        self.segments[0].geometry.t_start
    }

    pub fn end(&self) -> Tick {
        self.segments[self.segments.len() - 1].geometry.t_end
    }

    /// Number of retained samples.
    pub fn vertex_count(&self) -> usize {
        if self.original_len == 1 {
            1
        } else {
            self.segments.len() + 1
        }
    }

    pub fn actual_tolerance(&self) -> f64 {
        self.segments.iter().map(|s| s.actual_tolerance).fold(0.0, f64::max)
    }

    /// Segments whose time interval intersects the closed range `[start, end]`.
    pub fn segments_within(&self, start: Tick, end: Tick) -> &[Segment] {
        let lo = self.segments.partition_point(|s| s.geometry.t_end < start);
        let hi = self.segments.partition_point(|s| s.geometry.t_start <= end);
        if lo >= hi {
            &[]
        } else {
            &self.segments[lo..hi]
        }
    }

    /// The segment covering tick `t`, preferring the earlier one at a shared vertex.
    pub fn covering(&self, t: Tick) -> Option<&Segment> {
        let i = self.segments.partition_point(|s| s.geometry.t_end < t);
        self.segments.get(i).filter(|s| s.geometry.covers(t))
    }
}

/// Outcome of examining one index range during simplification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitEvent {
    /// The chord `first..=last` was kept; `max_deviation` over its interior.
    Accept { first: usize, last: usize, max_deviation: f64 },
    /// The range was split at `chosen`.
    Split { first: usize, last: usize, chosen: usize, chosen_deviation: f64, max_deviation: f64 },
}

/// Simplifies `o` with tolerance `delta`.
pub fn simplify(o: &Trajectory, delta: f64, simplifier: Simplifier) -> SimplifiedTrajectory {
    run(o, delta, simplifier, &mut |_| {})
}

pub fn dp(o: &Trajectory, delta: f64) -> SimplifiedTrajectory {
    simplify(o, delta, Simplifier::Dp)
}

pub fn dp_plus(o: &Trajectory, delta: f64) -> SimplifiedTrajectory {
    simplify(o, delta, Simplifier::DpPlus)
}

pub fn dp_star(o: &Trajectory, delta: f64) -> SimplifiedTrajectory {
    simplify(o, delta, Simplifier::DpStar)
}

/// As [`simplify`], also reporting every accept/split decision in the order taken.
pub fn simplify_traced(o: &Trajectory, delta: f64, simplifier: Simplifier) -> (SimplifiedTrajectory, Vec<SplitEvent>) {
    let mut events = Vec::new();
    let s = run(o, delta, simplifier, &mut |e| events.push(e));
    (s, events)
}

fn chord(pts: &[TimedPoint], i: usize, j: usize) -> TimedSegment {
    TimedSegment::new(pts[i].pos(), pts[i].t, pts[j].pos(), pts[j].t)
}

fn run(o: &Trajectory, delta: f64, simplifier: Simplifier, observe: &mut dyn FnMut(SplitEvent)) -> SimplifiedTrajectory {
    let pts = o.points();
    let owner = o.id();
    let mut segments = Vec::new();
    if pts.len() == 1 {
        segments.push(Segment { geometry: chord(pts, 0, 0), owner, actual_tolerance: 0.0, index: 0 });
        return SimplifiedTrajectory { owner, simplifier, segments, original_len: 1 };
    }

    // Left halves are pushed last so chords come out in time order.
    let mut stack = alloc::vec![(0usize, pts.len() - 1)];
    while let Some((first, last)) = stack.pop() {
        let line = chord(pts, first, last);
        let mut max_dev = 0.0f64;
        let mut max_at = first;
        let mut mid_at: Option<usize> = None;
        for (k, p) in pts.iter().enumerate().take(last).skip(first + 1) {
            let d = simplifier.deviation(p, &line);
            if d > max_dev || max_at == first {
                max_dev = d;
                max_at = k;
            }
            if simplifier == Simplifier::DpPlus && d > delta {
                let off = (2 * k).abs_diff(first + last);
                match mid_at {
                    Some(m) if (2 * m).abs_diff(first + last) <= off => {}
                    _ => mid_at = Some(k),
                }
            }
        }
        if last <= first + 1 || max_dev <= delta {
            observe(SplitEvent::Accept { first, last, max_deviation: max_dev });
            let index = segments.len();
            segments.push(Segment { geometry: line, owner, actual_tolerance: max_dev, index });
            continue;
        }
        let chosen = mid_at.unwrap_or(max_at);
        let chosen_deviation = simplifier.deviation(&pts[chosen], &line);
        observe(SplitEvent::Split { first, last, chosen, chosen_deviation, max_deviation: max_dev });
        stack.push((chosen, last));
        stack.push((first, chosen));
    }
    SimplifiedTrajectory { owner, simplifier, segments, original_len: pts.len() }
}

/// Largest deviation of the original samples in `[seg.t_start, seg.t_end]`
/// from `seg`, by direct scan.
pub fn recompute_tolerance(o: &Trajectory, seg: &Segment, simplifier: Simplifier) -> f64 {
    o.points()
        .iter()
        .filter(|p| seg.geometry.covers(p.t))
        .map(|p| simplifier.deviation(p, &seg.geometry))
        .fold(0.0, f64::max)
}

/// `(Σ|o| − Σ|o′|) / Σ|o|` over a dataset.
pub fn reduction_ratio(simplified: &[SimplifiedTrajectory]) -> f64 {
    let total: usize = simplified.iter().map(|s| s.original_len).sum();
    if total == 0 {
        return 0.0;
    }
    let kept: usize = simplified.iter().map(SimplifiedTrajectory::vertex_count).sum();
    (total - kept) as f64 / total as f64
}
