//! Trajectory model, sampling at arbitrary ticks and time partitioning.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::Point2;
use crate::simplify::{Segment, SimplifiedTrajectory};

/// Integer time index. The physical length of one tick is irrelevant here.
pub type Tick = u32;

/// Dense object identifier. Callers map their own names onto these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrajectoryError {
    #[error("trajectory of object {0} has no samples")]
    Empty(ObjectId),
    #[error("object {id} has non-increasing timestamps at tick {t}")]
    NotIncreasing { id: ObjectId, t: Tick },
    #[error("object {id} has duplicate samples at tick {t}")]
    DuplicateTimestamp { id: ObjectId, t: Tick },
    #[error("object {id} has a non-finite coordinate at tick {t}")]
    NonFinite { id: ObjectId, t: Tick },
    #[error("partition length must be at least 2 ticks, got {0}")]
    LambdaTooSmall(Tick),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPoint {
    pub x: f64,
    pub y: f64,
    pub t: Tick,
}

impl TimedPoint {
    pub const fn new(x: f64, y: f64, t: Tick) -> Self {
        Self { x, y, t }
    }

    pub fn pos(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Time-ordered samples of one object. Gaps between samples are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: ObjectId,
    points: Vec<TimedPoint>,
}

impl Trajectory {
    pub fn new(id: ObjectId, points: Vec<TimedPoint>) -> Result<Self, TrajectoryError> {
        if points.is_empty() {
            return Err(TrajectoryError::Empty(id));
        }
        for w in points.windows(2) {
            if w[1].t == w[0].t {
                return Err(TrajectoryError::DuplicateTimestamp { id, t: w[1].t });
            }
            if w[1].t < w[0].t {
                return Err(TrajectoryError::NotIncreasing { id, t: w[1].t });
            }
        }
        if let Some(p) = points.iter().find(|p| !p.pos().is_finite()) {
            return Err(TrajectoryError::NonFinite { id, t: p.t });
        }
        Ok(Self { id, points })
    }

    pub fn id(&self) -> ObjectId {
        self.id
    }

    pub fn points(&self) -> &[TimedPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> Tick {
        self.points[0].t
    }

    pub fn end(&self) -> Tick {
        self.points[self.points.len() - 1].t
    }

    /// Number of ticks in `[start, end]`.
    pub fn lifetime(&self) -> u32 {
        self.end() - self.start() + 1
    }

    pub fn alive_at(&self, t: Tick) -> bool {
        self.start() <= t && t <= self.end()
    }

    /// Location at `t`: the stored sample if present, linear interpolation
    /// between the bracketing samples inside the lifetime, `None` outside it.
    pub fn sample_at(&self, t: Tick) -> Option<Point2> {
        match self.points.binary_search_by_key(&t, |p| p.t) {
            Ok(i) => Some(self.points[i].pos()),
            Err(0) => None,
            Err(i) if i == self.points.len() => None,
            Err(i) => {
                let (a, b) = (self.points[i - 1], self.points[i]);
                let s = f64::from(t - a.t) / f64::from(b.t - a.t);
                Some(a.pos().lerp(b.pos(), s))
            }
        }
    }
}

/// Groups `(object, sample)` rows into trajectories sorted by id, each sorted
/// by time. Duplicate `(object, tick)` pairs are rejected.
pub fn assemble<I>(rows: I) -> Result<Vec<Trajectory>, TrajectoryError>
where
    I: IntoIterator<Item = (ObjectId, TimedPoint)>,
{
    let mut rows: Vec<_> = rows.into_iter().collect();
    rows.sort_by_key(|(id, p)| (*id, p.t));
    let mut out = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let id = rows[i].0;
        let mut j = i;
        while j < rows.len() && rows[j].0 == id {
            j += 1;
        }
        out.push(Trajectory::new(id, rows[i..j].iter().map(|r| r.1).collect())?);
        i = j;
    }
    Ok(out)
}

/// The contiguous run of ticks `[first, last]` spanned by a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeDomain {
    pub first: Tick,
    pub last: Tick,
}

impl TimeDomain {
    pub fn new(first: Tick, last: Tick) -> Self {
        assert!(first <= last, "empty time domain");
        Self { first, last }
    }

    pub fn of(trajectories: &[Trajectory]) -> Option<Self> {
        let first = trajectories.iter().map(Trajectory::start).min()?;
        let last = trajectories.iter().map(Trajectory::end).max()?;
        Some(Self { first, last })
    }

    pub fn len(&self) -> u32 {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ticks(&self) -> impl Iterator<Item = Tick> {
        self.first..=self.last
    }

    /// Closed intervals of `lambda` ticks each; neighbours share their
    /// boundary tick and the last one may be shorter.
    pub fn partition_bounds(&self, lambda: Tick) -> Result<Vec<(Tick, Tick)>, TrajectoryError> {
        if lambda < 2 {
            return Err(TrajectoryError::LambdaTooSmall(lambda));
        }
        let mut out = Vec::new();
        let mut start = self.first;
        loop {
            let end = start.saturating_add(lambda - 1).min(self.last);
            out.push((start, end));
            if end == self.last {
                break;
            }
            start = end;
        }
        Ok(out)
    }
}

/// The segments of one object that intersect a partition, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub owner: ObjectId,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub index: usize,
    pub start: Tick,
    pub end: Tick,
    /// One entry per object with at least one member segment, sorted by owner.
    pub polylines: Vec<Polyline>,
}

impl Partition {
    pub fn object_count(&self) -> usize {
        self.polylines.len()
    }
}

/// Splits the time domain of `simplified` into `lambda`-tick partitions and
/// assigns every segment to each partition its interval intersects.
pub fn partition_domain(simplified: &[SimplifiedTrajectory], lambda: Tick) -> Result<Vec<Partition>, TrajectoryError> {
    let Some(first) = simplified.iter().map(|s| s.start()).min() else {
        if lambda < 2 {
            return Err(TrajectoryError::LambdaTooSmall(lambda));
        }
        return Ok(Vec::new());
    };
    let last = simplified.iter().map(|s| s.end()).max().unwrap_or(first);
    partition_in(simplified, TimeDomain::new(first, last), lambda)
}

pub(crate) fn partition_in(
    simplified: &[SimplifiedTrajectory],
    domain: TimeDomain,
    lambda: Tick,
) -> Result<Vec<Partition>, TrajectoryError> {
    let bounds = domain.partition_bounds(lambda)?;
    let mut sorted: Vec<&SimplifiedTrajectory> = simplified.iter().collect();
    sorted.sort_by_key(|s| s.owner);
    Ok(bounds
        .into_iter()
        .enumerate()
        .map(|(index, (start, end))| {
            let polylines = sorted
                .iter()
                .filter_map(|s| {
                    let segs = s.segments_within(start, end);
                    (!segs.is_empty()).then(|| Polyline { owner: s.owner, segments: segs.to_vec() })
                })
                .collect();
            Partition { index, start, end, polylines }
        })
        .collect())
}
