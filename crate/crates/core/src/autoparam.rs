//! Automatic choice of the simplification tolerance and partition length.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::simplify::{simplify_traced, SimplifiedTrajectory, SplitEvent, Simplifier};
use crate::trajectory::{ObjectId, Tick, Trajectory};

/// Share of objects sampled by [`compute_delta`] when the caller has no preference.
pub const DEFAULT_SAMPLE_FRACTION: f64 = 0.10;

/// Tolerances met by a lossless DP run, one per interior point, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceTrace(Vec<f64>);

impl ToleranceTrace {
    /// Runs DP with zero tolerance on `o`. Each split records the deviation
    /// of its split point; points under an accepted (exact) chord record 0.
    pub fn of(o: &Trajectory) -> Self {
        let (_, events) = simplify_traced(o, 0.0, Simplifier::Dp);
        let mut values = Vec::with_capacity(o.len().saturating_sub(2));
        for ev in events {
            match ev {
                SplitEvent::Split { chosen_deviation, .. } => values.push(chosen_deviation),
                SplitEvent::Accept { first, last, .. } => {
                    values.extend(core::iter::repeat_n(0.0, last.saturating_sub(first + 1)));
                }
            }
        }
        Self::from_values(values)
    }

    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Lower value of the widest gap between adjacent tolerances below `e`.
    /// `None` when fewer than two tolerances are below `e`. Ties keep the
    /// smaller pair.
    pub fn select(&self, e: f64) -> Option<f64> {
        let below = &self.0[..self.0.partition_point(|&v| v < e)];
        let mut best: Option<(f64, f64)> = None;
        for w in below.windows(2) {
            let gap = w[1] - w[0];
            if best.is_none_or(|(g, _)| gap > g) {
                best = Some((gap, w[0]));
            }
        }
        best.map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaChoice {
    pub delta: f64,
    /// No sampled trajectory produced a usable gap, so `e / 2` was used.
    pub fallback: bool,
}

/// Averages [`ToleranceTrace::select`] over the first `⌈fraction · N⌉`
/// objects by id. Objects without a selection are skipped; if none has one
/// the result is `e / 2`.
pub fn compute_delta(o: &[Trajectory], e: f64, sample_fraction: f64) -> DeltaChoice {
    let mut sorted: Vec<&Trajectory> = o.iter().collect();
    sorted.sort_by_key(|t| t.id());
    let fraction = if sample_fraction.is_finite() { sample_fraction.clamp(0.0, 1.0) } else { 1.0 };
    let n = (libm::ceil(fraction * sorted.len() as f64) as usize).clamp(1.min(sorted.len()), sorted.len());
    let picks: Vec<f64> = sorted[..n].iter().filter_map(|t| ToleranceTrace::of(t).select(e)).collect();
    if picks.is_empty() {
        DeltaChoice { delta: e / 2.0, fallback: true }
    } else {
        DeltaChoice { delta: picks.iter().sum::<f64>() / picks.len() as f64, fallback: false }
    }
}

/// `τ · (|o′|/|o| · (1 − τ/T) + 2/T)` averaged over objects, rounded and
/// clamped to `[2, T]`, where `τ` is an object's lifetime in ticks and
/// `|o|`, `|o′|` are its vertex counts before and after simplification.
pub fn compute_lambda(o: &[Trajectory], simplified: &[SimplifiedTrajectory], ticks: u32) -> Tick {
    let ticks = ticks.max(2);
    let by_owner: BTreeMap<ObjectId, &SimplifiedTrajectory> = simplified.iter().map(|s| (s.owner, s)).collect();
    let big_t = f64::from(ticks);
    let values: Vec<f64> = o
        .iter()
        .map(|t| {
            let tau = f64::from(t.lifetime());
            let kept = by_owner.get(&t.id()).map_or(t.len(), |s| s.vertex_count());
            let ratio = kept as f64 / t.len() as f64;
            tau * (ratio * (1.0 - tau / big_t) + 2.0 / big_t)
        })
        .collect();
    if values.is_empty() {
        return 2;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let rounded = libm::round(mean);
    if rounded.is_nan() {
        return 2;
    }
    (rounded.clamp(2.0, big_t)) as Tick
}
