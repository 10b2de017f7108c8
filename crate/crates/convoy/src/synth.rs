//! Seeded synthetic scenes with planted convoys.
//!
//! Every object follows a random walk with persistent velocity. Members of a
//! planted convoy replace their own walk with a fixed offset from a shared
//! leader path while the convoy lasts; offsets lie within `0.45·e` of the
//! leader, so all members are pairwise within `e` and form one cluster for
//! any `m` up to the convoy size. Samples are only dropped where no convoy
//! membership depends on them.

use convoy_core::{Convoy, ObjectId, Tick, TimedPoint, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::Dataset;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PlantedConvoy {
    pub size: usize,
    pub start: Tick,
    pub end: Tick,
    /// Radius of member offsets around the leader; capped at `0.45·e`.
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticSpec {
    pub objects: usize,
    pub ticks: Tick,
    pub e: f64,
    pub convoys: Vec<PlantedConvoy>,
    /// Side of the square the walks start in.
    pub area: f64,
    /// Largest per-tick step.
    pub speed: f64,
    /// Chance that a droppable sample is left out.
    pub missing: f64,
    /// Give objects random start and end ticks; convoy members still cover
    /// their convoy's interval.
    pub irregular: bool,
}

impl SyntheticSpec {
    /// A scene of `objects` walkers over `ticks` ticks with no planted convoys.
    pub fn walkers(objects: usize, ticks: Tick, e: f64) -> Self {
        Self {
            objects,
            ticks,
            e,
            convoys: Vec::new(),
            area: 10.0 * e * (objects as f64).sqrt().max(1.0),
            speed: e / 2.0,
            missing: 0.0,
            irregular: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("planted convoys need {need} objects but the scene has {have}")]
    TooManyMembers { need: usize, have: usize },
    #[error("planted convoy interval [{start}, {end}] lies outside ticks 0..{ticks}")]
    Interval { start: Tick, end: Tick, ticks: Tick },
    #[error("planted convoy needs at least 2 members")]
    TooSmall,
    #[error("scene needs at least one object and one tick")]
    Empty,
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub data: Dataset,
    /// Planted convoys, in the order given by the spec.
    pub planted: Vec<Convoy>,
}

struct Walker {
    pos: (f64, f64),
    vel: (f64, f64),
}

impl Walker {
    fn new(rng: &mut ChaCha8Rng, area: f64, speed: f64) -> Self {
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let s = rng.random_range(0.0..=speed);
        Self { pos: (rng.random_range(0.0..=area), rng.random_range(0.0..=area)), vel: (s * a.cos(), s * a.sin()) }
    }

    fn step(&mut self, rng: &mut ChaCha8Rng, speed: f64) -> (f64, f64) {
        let turn = speed * 0.3;
        self.vel.0 += rng.random_range(-turn..=turn);
        self.vel.1 += rng.random_range(-turn..=turn);
        let norm = self.vel.0.hypot(self.vel.1);
        if norm > speed {
            self.vel = (self.vel.0 * speed / norm, self.vel.1 * speed / norm);
        }
        self.pos = (self.pos.0 + self.vel.0, self.pos.1 + self.vel.1);
        self.pos
    }
}

fn path(rng: &mut ChaCha8Rng, ticks: Tick, area: f64, speed: f64) -> Vec<(f64, f64)> {
    let mut w = Walker::new(rng, area, speed);
    (0..ticks).map(|_| w.step(rng, speed)).collect()
}

fn check(spec: &SyntheticSpec) -> Result<(), SpecError> {
    if spec.objects == 0 || spec.ticks == 0 {
        return Err(SpecError::Empty);
    }
    if !(spec.e > 0.0 && spec.e.is_finite()) {
        return Err(SpecError::Parameter("e must be positive"));
    }
    if !(spec.area >= 0.0 && spec.area.is_finite() && spec.speed >= 0.0 && spec.speed.is_finite()) {
        return Err(SpecError::Parameter("area and speed must be finite and non-negative"));
    }
    if !(0.0..=1.0).contains(&spec.missing) {
        return Err(SpecError::Parameter("missing must lie in [0, 1]"));
    }
    let need: usize = spec.convoys.iter().map(|c| c.size).sum();
    if need > spec.objects {
        return Err(SpecError::TooManyMembers { need, have: spec.objects });
    }
    for c in &spec.convoys {
        if c.size < 2 {
            return Err(SpecError::TooSmall);
        }
        if c.start > c.end || c.end >= spec.ticks {
            return Err(SpecError::Interval { start: c.start, end: c.end, ticks: spec.ticks });
        }
        if !(c.jitter >= 0.0 && c.jitter.is_finite()) {
            return Err(SpecError::Parameter("jitter must be finite and non-negative"));
        }
    }
    Ok(())
}

/// Builds the scene for `spec`; identical seeds give identical scenes.
/// Objects are named `o1`, `o2`, ... with zero padding, members of the
/// planted convoys first.
pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<Synthetic, SpecError> {
    check(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = spec.objects.to_string().len();
    let names: Vec<String> = (1..=spec.objects).map(|i| format!("o{i:0width$}")).collect();

    // convoy index per member object
    let mut role: Vec<Option<usize>> = vec![None; spec.objects];
    let mut planted = Vec::new();
    let mut next = 0;
    for (ci, c) in spec.convoys.iter().enumerate() {
        let members = (next..next + c.size).map(|i| ObjectId(i as u32)).collect();
        for r in &mut role[next..next + c.size] {
            *r = Some(ci);
        }
        next += c.size;
        planted.push(Convoy { members, start: c.start, end: c.end });
    }

    let leaders: Vec<Vec<(f64, f64)>> = spec.convoys.iter().map(|_| path(&mut rng, spec.ticks, spec.area, spec.speed)).collect();
    let mut trajectories = Vec::with_capacity(spec.objects);
    for (i, r) in role.iter().enumerate() {
        let own = path(&mut rng, spec.ticks, spec.area, spec.speed);
        let (first, last) = if spec.irregular {
            let a = rng.random_range(0..spec.ticks);
            let b = rng.random_range(0..spec.ticks);
            match r {
                // Members stay alive for their whole convoy.
                Some(ci) => (a.min(spec.convoys[*ci].start), b.max(spec.convoys[*ci].end)),
                None => (a.min(b), a.max(b)),
            }
        } else {
            (0, spec.ticks - 1)
        };
        let offset = r.map(|ci| {
            let radius = spec.convoys[ci].jitter.min(0.45 * spec.e);
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let d = radius * rng.random_range(0.0f64..=1.0).sqrt();
            (d * a.cos(), d * a.sin())
        });
        let mut pts = Vec::new();
        for t in first..=last {
            let inside = r.is_some_and(|ci| (spec.convoys[ci].start..=spec.convoys[ci].end).contains(&t));
            // Interpolating across a convoy boundary could pull a member away.
            let near_convoy = r.is_some_and(|ci| {
                let c = &spec.convoys[ci];
                t + 1 >= c.start && t <= c.end + 1
            });
            let droppable = t != first && t != last && !near_convoy;
            if droppable && spec.missing > 0.0 && rng.random_bool(spec.missing) {
                continue;
            }
            let (x, y) = match (inside, r, offset) {
                (true, Some(ci), Some((dx, dy))) => {
                    let (lx, ly) = leaders[*ci][t as usize];
                    (lx + dx, ly + dy)
                }
                _ => own[t as usize],
            };
            pts.push(TimedPoint::new(x, y, t));
        }
        trajectories.push(Trajectory::new(ObjectId(i as u32), pts).expect("generated samples are valid"));
    }
    Ok(Synthetic { data: Dataset::new(names, trajectories), planted })
}

/// Spec with `count` planted convoys of random size and interval.
pub fn random_spec(rng: &mut impl Rng, objects: usize, ticks: Tick, e: f64, count: usize, min_len: Tick) -> SyntheticSpec {
    let mut spec = SyntheticSpec::walkers(objects, ticks, e);
    let mut free = objects;
    for _ in 0..count {
        if free < 2 || ticks < min_len.max(1) {
            break;
        }
        let size = rng.random_range(2..=free.min(6));
        let len = rng.random_range(min_len.max(1)..=ticks);
        let start = rng.random_range(0..=ticks - len);
        spec.convoys.push(PlantedConvoy { size, start, end: start + len - 1, jitter: 0.45 * e });
        free -= size;
    }
    spec
}
