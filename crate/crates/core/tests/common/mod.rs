#![allow(dead_code)]

use convoy_core::{ObjectId, Tick, TimedPoint, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Scene {
    pub trajectories: Vec<Trajectory>,
    pub e: f64,
}

/// Small random scene: a few leaders wander with persistent velocity, other
/// objects follow one leader for random stretches and wander alone otherwise.
/// Some samples are dropped and lifetimes vary.
pub fn random_scene(seed: u64, max_objects: usize, max_ticks: Tick) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_objects);
    let ticks = rng.random_range(3..=max_ticks);
    let e = 1.0;
    let leaders = rng.random_range(1..=3usize);
    let area = 6.0 + n as f64;
    let walk = |rng: &mut ChaCha8Rng| {
        let mut p = (rng.random_range(0.0..area), rng.random_range(0.0..area));
        let mut v: (f64, f64) = (rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));
        (0..ticks)
            .map(|_| {
                v.0 = (v.0 + rng.random_range(-0.3..0.3)).clamp(-0.8, 0.8);
                v.1 = (v.1 + rng.random_range(-0.3..0.3)).clamp(-0.8, 0.8);
                p = (p.0 + v.0, p.1 + v.1);
                p
            })
            .collect::<Vec<_>>()
    };
    let paths: Vec<Vec<(f64, f64)>> = (0..leaders).map(|_| walk(&mut rng)).collect();
    let mut out = Vec::new();
    for id in 0..n {
        let own = walk(&mut rng);
        let leader = rng.random_range(0..leaders);
        let (join, leave) = {
            let a = rng.random_range(0..ticks);
            let b = rng.random_range(0..ticks);
            (a.min(b), a.max(b))
        };
        let follows = rng.random_bool(0.75);
        let (first, last) = if rng.random_bool(0.3) {
            let a = rng.random_range(0..ticks);
            let b = rng.random_range(0..ticks);
            (a.min(b), a.max(b))
        } else {
            (0, ticks - 1)
        };
        let mut pts = Vec::new();
        for t in first..=last {
            if t != first && t != last && rng.random_bool(0.1) {
                continue;
            }
            let i = t as usize;
            let (x, y) = if follows && (join..=leave).contains(&t) {
                let (lx, ly) = paths[leader][i];
                (lx + rng.random_range(-0.3..0.3), ly + rng.random_range(-0.3..0.3))
            } else {
                own[i]
            };
            pts.push(TimedPoint::new(x, y, t));
        }
        out.push(Trajectory::new(ObjectId(id as u32), pts).unwrap());
    }
    Scene { trajectories: out, e }
}
