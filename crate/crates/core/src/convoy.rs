//! Convoy discovery.
//!
//! [`cmc`] clusters every tick and chains clusters into convoys. The CuTS
//! family ([`cuts_filter`] followed by [`cuts_refine`]) clusters simplified
//! polylines per time partition to obtain a cover of candidate convoys, then
//! re-runs the tick-level chaining only inside each candidate. [`discover`]
//! composes either route, [`mc2`] is the moving-cluster baseline used for
//! accuracy comparisons, and [`brute_force`] is an enumeration oracle.
//!
//! # Reported set
//!
//! A convoy `(S, [s, e])` has `|S| >= m`, `e - s + 1 >= k`, and at every tick
//! of `[s, e]` all of `S` lies inside one snapshot cluster. Results are the
//! maximal convoys: those not dominated by another convoy with a superset of
//! members over a superset interval (see [`normalize`]).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::autoparam::{compute_delta, compute_lambda, DEFAULT_SAMPLE_FRACTION};
use crate::clustering::{dbscan_points, traj_dbscan, RangeSearchMode};
use crate::exec::{Clock, Executor, NoClock, Sequential};
use crate::geometry::Point2;
use crate::simplify::{reduction_ratio, simplify, SimplifiedTrajectory, Simplifier};
use crate::trajectory::{partition_in, ObjectId, Tick, TimeDomain, Trajectory, TrajectoryError};

pub type Members = BTreeSet<ObjectId>;

/// Largest scene [`brute_force`] accepts.
pub const BRUTE_FORCE_MAX_OBJECTS: usize = 64;
pub const BRUTE_FORCE_MAX_TICKS: u32 = 512;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConvoyError {
    #[error("m must be at least 2, got {0}")]
    MinObjects(usize),
    #[error("k must be at least 1, got {0}")]
    MinLifetime(u32),
    #[error("e must be positive and finite, got {0}")]
    Range(f64),
    #[error("theta must lie in (0, 1], got {0}")]
    Theta(f64),
    #[error("delta must be non-negative and finite, got {0}")]
    Delta(f64),
    #[error("scene too large for brute force ({objects} objects, {ticks} ticks)")]
    ScaleGuard { objects: usize, ticks: u32 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Convoy query: at least `m` objects, at least `k` consecutive ticks,
/// neighbourhood range `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryParams {
    pub m: usize,
    pub k: u32,
    pub e: f64,
}

impl QueryParams {
    pub fn new(m: usize, k: u32, e: f64) -> Result<Self, ConvoyError> {
        if m < 2 {
            return Err(ConvoyError::MinObjects(m));
        }
        if k < 1 {
            return Err(ConvoyError::MinLifetime(k));
        }
        if !(e > 0.0 && e.is_finite()) {
            return Err(ConvoyError::Range(e));
        }
        Ok(Self { m, k, e })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate {
    pub members: Members,
    pub start: Tick,
    pub end: Tick,
    pub lifetime: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Convoy {
    pub members: Members,
    pub start: Tick,
    pub end: Tick,
}

impl Convoy {
    pub fn lifetime(&self) -> u32 {
        self.end - self.start + 1
    }

    fn dominates(&self, other: &Convoy) -> bool {
        self.start <= other.start && self.end >= other.end && self.members.is_superset(&other.members)
    }
}

impl Ord for Convoy {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.start, &self.members, self.end).cmp(&(other.start, &other.members, other.end))
    }
}

impl PartialOrd for Convoy {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Cmc,
    Cuts,
    CutsPlus,
    CutsStar,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Cmc => "cmc",
            Variant::Cuts => "cuts",
            Variant::CutsPlus => "cuts+",
            Variant::CutsStar => "cuts*",
        }
    }

    pub fn simplifier(self) -> Option<Simplifier> {
        match self {
            Variant::Cmc => None,
            Variant::Cuts => Some(Simplifier::Dp),
            Variant::CutsPlus => Some(Simplifier::DpPlus),
            Variant::CutsStar => Some(Simplifier::DpStar),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown algorithm (expected cmc, cuts, cuts+ or cuts*)")]
pub struct UnknownVariant;

impl FromStr for Variant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cmc" => Ok(Variant::Cmc),
            "cuts" => Ok(Variant::Cuts),
            "cuts+" => Ok(Variant::CutsPlus),
            "cuts*" => Ok(Variant::CutsStar),
            _ => Err(UnknownVariant),
        }
    }
}

/// Internal knobs of one CuTS run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantConfig {
    pub simplifier: Simplifier,
    pub mode: RangeSearchMode,
    pub delta: f64,
    pub lambda: Tick,
}

impl VariantConfig {
    /// DP and DP+ pair with the spatial segment distance, DP* with the
    /// time-synchronised one.
    pub fn new(simplifier: Simplifier, delta: f64, lambda: Tick) -> Self {
        let mode = match simplifier {
            Simplifier::Dp | Simplifier::DpPlus => RangeSearchMode::Ll,
            Simplifier::DpStar => RangeSearchMode::Star,
        };
        Self { simplifier, mode, delta, lambda }
    }
}

/// Candidate chaining shared by the tick-level and partition-level sweeps.
///
/// Each step receives that step's clusters. A live chain is intersected with
/// every cluster; intersections of at least `m` objects live on. A chain that
/// is not carried forward unchanged is emitted if its lifetime reached `k`.
/// Every cluster also seeds a fresh chain, so groups that form while an older
/// chain is being narrowed are tracked from their own start.
struct Chainer {
    m: usize,
    k: u32,
    live: Vec<Candidate>,
    done: Vec<Candidate>,
}

impl Chainer {
    fn new(m: usize, k: u32) -> Self {
        Self { m, k, live: Vec::new(), done: Vec::new() }
    }

    fn step(&mut self, clusters: &[Members], start: Tick, end: Tick, grow: u32, seed: u32) {
        let mut next: BTreeMap<Members, Candidate> = BTreeMap::new();
        let mut merge = |c: Candidate| match next.get_mut(&c.members) {
            Some(have) => {
                have.start = have.start.min(c.start);
                have.lifetime = have.lifetime.max(c.lifetime);
            }
            None => {
                next.insert(c.members.clone(), c);
            }
        };
        for v in core::mem::take(&mut self.live) {
            let mut carried = false;
            for c in clusters {
                let common: Members = v.members.intersection(c).copied().collect();
                if common.len() >= self.m {
                    carried |= common.len() == v.members.len();
                    merge(Candidate { members: common, start: v.start, end, lifetime: v.lifetime + grow });
                }
            }
            if !carried && v.lifetime >= self.k {
                self.done.push(v);
            }
        }
        for c in clusters {
            merge(Candidate { members: c.clone(), start, end, lifetime: seed });
        }
        self.live = next.into_values().collect();
    }

    fn finish(mut self) -> Vec<Candidate> {
        let k = self.k;
        self.done.extend(self.live.into_iter().filter(|v| v.lifetime >= k));
        self.done
    }
}

/// Positions at tick `t` of every trajectory alive then, interpolating gaps.
fn positions_at<'a>(trajs: impl Iterator<Item = &'a Trajectory>, t: Tick) -> Vec<(ObjectId, Point2)> {
    trajs.filter_map(|o| o.sample_at(t).map(|p| (o.id(), p))).collect()
}

/// Snapshot cluster member sets at tick `t`.
pub fn snapshot_clusters(trajs: &[Trajectory], t: Tick, e: f64, m: usize) -> Vec<Members> {
    let pts = positions_at(trajs.iter(), t);
    if pts.len() < m {
        return Vec::new();
    }
    dbscan_points(&pts, e, m).into_iter().map(|c| c.members).collect()
}

fn into_convoys(cands: Vec<Candidate>) -> Vec<Convoy> {
    cands.into_iter().map(|c| Convoy { members: c.members, start: c.start, end: c.end }).collect()
}

/// Tick-level chaining over `[first, last]`. Clusters are computed over
/// `population` and, when `restrict` is given, intersected with it first.
fn chain_ticks(population: &[&Trajectory], q: &QueryParams, first: Tick, last: Tick, restrict: Option<&Members>) -> Vec<Convoy> {
    let mut chainer = Chainer::new(q.m, q.k);
    let mut pts = Vec::with_capacity(population.len());
    for t in first..=last {
        pts.clear();
        pts.extend(population.iter().filter_map(|o| o.sample_at(t).map(|p| (o.id(), p))));
        // Too few restricted objects alive means no cluster can survive the intersection.
        let enough = pts.len() >= q.m && restrict.is_none_or(|r| pts.iter().filter(|p| r.contains(&p.0)).count() >= q.m);
        let mut clusters: Vec<Members> =
            if enough { dbscan_points(&pts, q.e, q.m).into_iter().map(|c| c.members).collect() } else { Vec::new() };
        if let Some(r) = restrict {
            clusters = clusters
                .into_iter()
                .map(|c| c.intersection(r).copied().collect::<Members>())
                .filter(|c| c.len() >= q.m)
                .collect();
        }
        chainer.step(&clusters, t, t, 1, 1);
    }
    into_convoys(chainer.finish())
}

/// Exact convoy discovery by clustering every tick of the time domain.
///
/// Objects missing a sample inside their lifetime are placed by linear
/// interpolation.
pub fn cmc(o: &[Trajectory], q: &QueryParams) -> Vec<Convoy> {
    let Some(domain) = TimeDomain::of(o) else {
        return Vec::new();
    };
    let all: Vec<&Trajectory> = o.iter().collect();
    normalize(chain_ticks(&all, q, domain.first, domain.last, None))
}

/// Drops duplicates and every convoy dominated by another (superset of
/// members over a superset interval). Output is sorted by start, then members.
pub fn normalize(mut convoys: Vec<Convoy>) -> Vec<Convoy> {
    convoys.sort();
    convoys.dedup();
    let keep: Vec<bool> = convoys
        .iter()
        .enumerate()
        .map(|(i, c)| !convoys.iter().enumerate().any(|(j, d)| i != j && d.dominates(c)))
        .collect();
    convoys.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}

/// Polyline clusters found in one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionClusters {
    pub start: Tick,
    pub end: Tick,
    pub clusters: Vec<Members>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub candidates: Vec<Candidate>,
    /// Per-partition clusters, kept so refinement can rebuild exact density
    /// connectivity around each candidate.
    pub partitions: Vec<PartitionClusters>,
}

/// Simplifies every trajectory with `simplifier`.
pub fn simplify_all<E: Executor>(o: &[Trajectory], simplifier: Simplifier, delta: f64, exec: &E) -> Vec<SimplifiedTrajectory> {
    exec.map(o, |t| simplify(t, delta, simplifier))
}

/// Filter step over already simplified trajectories.
pub fn filter_simplified(
    simplified: &[SimplifiedTrajectory],
    domain: TimeDomain,
    q: &QueryParams,
    cfg: &VariantConfig,
) -> Result<FilterOutput, ConvoyError> {
    let mut chainer = Chainer::new(q.m, q.k);
    let mut partitions = Vec::new();
    for part in partition_in(simplified, domain, cfg.lambda)? {
        let clusters: Vec<Members> = if part.object_count() < q.m {
            Vec::new()
        } else {
            traj_dbscan(&part, q.e, q.m, cfg.mode).into_iter().map(|c| c.members).collect()
        };
        chainer.step(&clusters, part.start, part.end, cfg.lambda, cfg.lambda);
        partitions.push(PartitionClusters { start: part.start, end: part.end, clusters });
    }
    Ok(FilterOutput { candidates: prune_dominated(chainer.finish()), partitions })
}

/// Removes candidates whose members and window are both covered by another
/// candidate; the cover of true convoys is unchanged.
fn prune_dominated(mut cands: Vec<Candidate>) -> Vec<Candidate> {
    cands.sort();
    cands.dedup_by(|a, b| a.members == b.members && a.start == b.start && a.end == b.end);
    let covered = |c: &Candidate, d: &Candidate| d.start <= c.start && d.end >= c.end && d.members.is_superset(&c.members);
    let keep: Vec<bool> = cands
        .iter()
        .enumerate()
        .map(|(i, c)| {
            !cands.iter().enumerate().any(|(j, d)| {
                i != j && covered(c, d) && !(covered(d, c) && j > i)
            })
        })
        .collect();
    cands.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}

/// Simplify, partition and cluster: returns a cover of all convoys.
pub fn cuts_filter(o: &[Trajectory], q: &QueryParams, cfg: &VariantConfig) -> Result<FilterOutput, ConvoyError> {
    let Some(domain) = TimeDomain::of(o) else {
        return Ok(FilterOutput { candidates: Vec::new(), partitions: Vec::new() });
    };
    if !(cfg.delta >= 0.0 && cfg.delta.is_finite()) {
        return Err(ConvoyError::Delta(cfg.delta));
    }
    let simplified = simplify_all(o, cfg.simplifier, cfg.delta, &Sequential);
    filter_simplified(&simplified, domain, q, cfg)
}

/// Objects whose positions can influence the clustering of `cand`'s members:
/// every partition cluster in the candidate's window that shares a member.
fn support(cand: &Candidate, partitions: &[PartitionClusters]) -> Members {
    let lo = partitions.partition_point(|p| p.end < cand.start);
    let mut out = cand.members.clone();
    for p in partitions[lo..].iter().take_while(|p| p.start <= cand.end) {
        for c in &p.clusters {
            if !c.is_disjoint(&cand.members) {
                out.extend(c.iter().copied());
            }
        }
    }
    out
}

/// Exact convoys inside one candidate: tick-level chaining over the
/// candidate's window, clustering its support and keeping only its members.
pub fn refine_candidate(
    cand: &Candidate,
    partitions: &[PartitionClusters],
    by_id: &BTreeMap<ObjectId, &Trajectory>,
    q: &QueryParams,
) -> Vec<Convoy> {
    let population: Vec<&Trajectory> = support(cand, partitions).iter().filter_map(|id| by_id.get(id).copied()).collect();
    chain_ticks(&population, q, cand.start, cand.end, Some(&cand.members))
}

pub fn cuts_refine_with<E: Executor>(filter: &FilterOutput, o: &[Trajectory], q: &QueryParams, exec: &E) -> Vec<Convoy> {
    let by_id: BTreeMap<ObjectId, &Trajectory> = o.iter().map(|t| (t.id(), t)).collect();
    let found = exec.map(&filter.candidates, |c| refine_candidate(c, &filter.partitions, &by_id, q));
    normalize(found.into_iter().flatten().collect())
}

/// Refinement step: verifies candidates against the original trajectories.
pub fn cuts_refine(filter: &FilterOutput, o: &[Trajectory], q: &QueryParams) -> Vec<Convoy> {
    cuts_refine_with(filter, o, q, &Sequential)
}

/// `Σ |members|² × lifetime` over candidates.
pub fn refinement_unit(cands: &[Candidate]) -> u64 {
    cands.iter().map(|c| (c.members.len() as u64).pow(2) * u64::from(c.lifetime)).sum()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub simplify_ms: f64,
    pub filter_ms: f64,
    pub refine_ms: f64,
    pub total_ms: f64,
    pub candidates: usize,
    pub refinement_units: u64,
    pub reduction_ratio: f64,
    pub delta: Option<f64>,
    pub lambda: Option<Tick>,
    /// Set when no sampled trajectory yielded a usable tolerance gap.
    pub delta_fallback: bool,
    pub convoys: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discovery {
    pub convoys: Vec<Convoy>,
    pub candidates: Vec<Candidate>,
    pub stats: RunStats,
}

/// Runs `variant`; the CuTS family resolves missing `delta`/`lambda` with
/// the automatic heuristics. `cmc` ignores both.
pub fn discover(
    o: &[Trajectory],
    q: &QueryParams,
    variant: Variant,
    delta: Option<f64>,
    lambda: Option<Tick>,
) -> Result<Discovery, ConvoyError> {
    discover_with(o, q, variant, delta, lambda, &Sequential, &NoClock)
}

pub fn discover_with<E: Executor, C: Clock>(
    o: &[Trajectory],
    q: &QueryParams,
    variant: Variant,
    delta: Option<f64>,
    lambda: Option<Tick>,
    exec: &E,
    clock: &C,
) -> Result<Discovery, ConvoyError> {
    let started = clock.now();
    let mut stats = RunStats::default();
    let Some(simplifier) = variant.simplifier() else {
        let convoys = cmc(o, q);
        stats.refine_ms = clock.elapsed_ms(started);
        stats.total_ms = stats.refine_ms;
        stats.convoys = convoys.len();
        return Ok(Discovery { convoys, candidates: Vec::new(), stats });
    };
    let Some(domain) = TimeDomain::of(o) else {
        return Ok(Discovery { convoys: Vec::new(), candidates: Vec::new(), stats });
    };

    let t0 = clock.now();
    let delta = match delta {
        Some(d) if d >= 0.0 && d.is_finite() => d,
        Some(d) => return Err(ConvoyError::Delta(d)),
        None => {
            let choice = compute_delta(o, q.e, DEFAULT_SAMPLE_FRACTION);
            stats.delta_fallback = choice.fallback;
            choice.delta
        }
    };
    let simplified = simplify_all(o, simplifier, delta, exec);
    stats.simplify_ms = clock.elapsed_ms(t0);
    stats.reduction_ratio = reduction_ratio(&simplified);

    let t1 = clock.now();
    let lambda = lambda.unwrap_or_else(|| compute_lambda(o, &simplified, domain.len()));
    let cfg = VariantConfig::new(simplifier, delta, lambda);
    let filter = filter_simplified(&simplified, domain, q, &cfg)?;
    stats.filter_ms = clock.elapsed_ms(t1);

    let t2 = clock.now();
    let convoys = cuts_refine_with(&filter, o, q, exec);
    stats.refine_ms = clock.elapsed_ms(t2);

    stats.total_ms = clock.elapsed_ms(started);
    stats.delta = Some(delta);
    stats.lambda = Some(lambda);
    stats.candidates = filter.candidates.len();
    stats.refinement_units = refinement_unit(&filter.candidates);
    stats.convoys = convoys.len();
    Ok(Discovery { convoys, candidates: filter.candidates, stats })
}

/// Moving clusters: snapshot clusters chained while consecutive clusters
/// overlap by a Jaccard ratio of at least `theta`. Chains of two or more
/// clusters are reported with the union of their members. There is no
/// lifetime constraint and no narrowing to common members, so the output is
/// not a convoy set.
pub fn mc2(o: &[Trajectory], theta: f64, e: f64, m: usize) -> Result<Vec<Candidate>, ConvoyError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(ConvoyError::Theta(theta));
    }
    let Some(domain) = TimeDomain::of(o) else {
        return Ok(Vec::new());
    };
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
    struct Chain {
        members: Members,
        start: Tick,
        last: Members,
    }
    let jaccard = |a: &Members, b: &Members| {
        let common = a.intersection(b).count();
        common as f64 / (a.len() + b.len() - common) as f64
    };
    let mut out = Vec::new();
    let mut emit = |c: Chain, end: Tick| {
        if end > c.start {
            out.push(Candidate { lifetime: end - c.start + 1, members: c.members, start: c.start, end });
        }
    };
    let mut live: Vec<Chain> = Vec::new();
    for t in domain.ticks() {
        let clusters = snapshot_clusters(o, t, e, m);
        let mut assigned = alloc::vec![false; clusters.len()];
        let mut next = BTreeSet::new();
        for v in core::mem::take(&mut live) {
            let mut extended = false;
            for (i, c) in clusters.iter().enumerate() {
                if jaccard(&v.last, c) >= theta {
                    extended = true;
                    assigned[i] = true;
                    let members = v.members.union(c).copied().collect();
                    next.insert(Chain { members, start: v.start, last: c.clone() });
                }
            }
            if !extended {
                emit(v, t - 1);
            }
        }
        for (c, a) in clusters.into_iter().zip(assigned) {
            if !a {
                next.insert(Chain { members: c.clone(), start: t, last: c });
            }
        }
        live = next.into_iter().collect();
    }
    for v in live {
        emit(v, domain.last);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// False-positive and false-negative percentages of `trial` against `reference`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    pub false_positive_pct: f64,
    pub false_negative_pct: f64,
}

/// Compares two result sets by exact `(members, start, end)` match.
///
/// False positives are `|trial − reference| / |trial|`, false negatives
/// `|reference − trial| / |reference|`, both in percent; an empty
/// denominator yields 0.
pub fn accuracy_report(reference: &[Convoy], trial: &[Candidate]) -> Accuracy {
    let key = |m: &Members, s: Tick, e: Tick| (m.clone(), s, e);
    let r: BTreeSet<_> = normalize(reference.to_vec()).iter().map(|c| key(&c.members, c.start, c.end)).collect();
    let t: BTreeSet<_> = trial.iter().map(|c| key(&c.members, c.start, c.end)).collect();
    let pct = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 * 100.0 / den as f64 };
    Accuracy {
        false_positive_pct: pct(t.difference(&r).count(), t.len()),
        false_negative_pct: pct(r.difference(&t).count(), r.len()),
    }
}

/// Enumeration oracle for small scenes.
///
/// For every start tick it refines the snapshot cluster partitions tick by
/// tick; each block of the refinement over `[s, t]` is exactly a maximal
/// member set for that interval. Blocks of at least `m` objects over at least
/// `k` ticks that cannot be extended left or right unchanged are reported,
/// then normalised.
pub fn brute_force(o: &[Trajectory], q: &QueryParams) -> Result<Vec<Convoy>, ConvoyError> {
    let Some(domain) = TimeDomain::of(o) else {
        return Ok(Vec::new());
    };
    if o.len() > BRUTE_FORCE_MAX_OBJECTS || domain.len() > BRUTE_FORCE_MAX_TICKS {
        return Err(ConvoyError::ScaleGuard { objects: o.len(), ticks: domain.len() });
    }
    // label[t][obj] = index of obj's snapshot cluster at t, if any.
    let labels: Vec<BTreeMap<ObjectId, usize>> = domain
        .ticks()
        .map(|t| {
            snapshot_clusters(o, t, q.e, q.m)
                .into_iter()
                .enumerate()
                .flat_map(|(i, c)| c.into_iter().map(move |id| (id, i)))
                .collect()
        })
        .collect();
    let same_cluster = |ti: usize, set: &Members| -> bool {
        let mut it = set.iter().map(|id| labels[ti].get(id));
        match it.next() {
            Some(Some(first)) => it.all(|l| l == Some(first)),
            _ => false,
        }
    };
    let n_ticks = labels.len();
    let mut found = Vec::new();
    for s in 0..n_ticks {
        // block key -> members, refined as t advances
        let mut blocks: Vec<Members> = group_by_label(&labels[s], |_| true);
        for t in s..n_ticks {
            if t > s {
                blocks = blocks
                    .iter()
                    .flat_map(|b| group_by_label(&labels[t], |id| b.contains(id)))
                    .filter(|b| b.len() >= q.m)
                    .collect();
            }
            if blocks.is_empty() {
                break;
            }
            if (t - s + 1) < q.k as usize {
                continue;
            }
            for b in &blocks {
                if b.len() < q.m {
                    continue;
                }
                let left_open = s > 0 && same_cluster(s - 1, b);
                let right_open = t + 1 < n_ticks && same_cluster(t + 1, b);
                if !left_open && !right_open {
                    found.push(Convoy { members: b.clone(), start: domain.first + s as Tick, end: domain.first + t as Tick });
                }
            }
        }
    }
    Ok(normalize(found))
}

fn group_by_label(labels: &BTreeMap<ObjectId, usize>, keep: impl Fn(&ObjectId) -> bool) -> Vec<Members> {
    let mut groups: BTreeMap<usize, Members> = BTreeMap::new();
    for (id, l) in labels {
        if keep(id) {
            groups.entry(*l).or_default().insert(*id);
        }
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::TimedPoint;
    use alloc::vec;

    fn set(ids: &[u32]) -> Members {
        ids.iter().map(|&i| ObjectId(i)).collect()
    }

    fn traj(id: u32, pts: &[(f64, f64, Tick)]) -> Trajectory {
        Trajectory::new(ObjectId(id), pts.iter().map(|&(x, y, t)| TimedPoint::new(x, y, t)).collect()).unwrap()
    }

    #[test]
    fn params_are_validated() {
        assert!(QueryParams::new(2, 3, 1.0).is_ok());
        assert_eq!(QueryParams::new(1, 3, 1.0), Err(ConvoyError::MinObjects(1)));
        assert_eq!(QueryParams::new(2, 0, 1.0), Err(ConvoyError::MinLifetime(0)));
        assert!(matches!(QueryParams::new(2, 3, 0.0), Err(ConvoyError::Range(_))));
        assert!(matches!(QueryParams::new(2, 3, f64::NAN), Err(ConvoyError::Range(_))));
    }

    #[test]
    fn chainer_narrows_and_emits() {
        let mut ch = Chainer::new(2, 3);
        ch.step(&[set(&[1, 2, 3])], 1, 1, 1, 1);
        ch.step(&[set(&[1, 2, 3])], 2, 2, 1, 1);
        ch.step(&[set(&[2, 3]), set(&[4, 5])], 3, 3, 1, 1);
        ch.step(&[], 4, 4, 1, 1);
        let mut out = ch.finish();
        out.sort();
        assert_eq!(
            out,
            vec![Candidate { members: set(&[2, 3]), start: 1, end: 3, lifetime: 3 }]
        );
    }

    #[test]
    fn chainer_keeps_wider_group_that_forms_later() {
        // {1,2} from tick 1; {1,2,3,4} forms at tick 2 and lasts to tick 4.
        let mut ch = Chainer::new(3, 3);
        ch.step(&[set(&[1, 2, 5])], 1, 1, 1, 1);
        for t in 2..=4 {
            ch.step(&[set(&[1, 2, 3, 4])], t, t, 1, 1);
        }
        let out = into_convoys(ch.finish());
        assert_eq!(normalize(out), vec![Convoy { members: set(&[1, 2, 3, 4]), start: 2, end: 4 }]);
    }

    #[test]
    fn normalization_drops_dominated() {
        let a = Convoy { members: set(&[1, 2, 3]), start: 1, end: 5 };
        let b = Convoy { members: set(&[1, 2]), start: 2, end: 5 };
        let c = Convoy { members: set(&[1, 2]), start: 1, end: 9 };
        assert_eq!(normalize(vec![b.clone(), a.clone(), c.clone(), a.clone()]), vec![c, a]);
    }

    #[test]
    fn separated_objects_have_no_convoys() {
        let o: Vec<_> = (0..4).map(|i| traj(i, &[(f64::from(i) * 10.0, 0.0, 1), (f64::from(i) * 10.0, 1.0, 5)])).collect();
        let q = QueryParams::new(2, 2, 1.0).unwrap();
        assert!(cmc(&o, &q).is_empty());
        assert!(brute_force(&o, &q).unwrap().is_empty());
        for v in [Variant::Cuts, Variant::CutsPlus, Variant::CutsStar] {
            let d = discover(&o, &q, v, None, None).unwrap();
            assert!(d.convoys.is_empty());
            assert!(d.candidates.is_empty(), "{v}");
        }
    }

    #[test]
    fn refinement_unit_examples() {
        let c = |n: u32, life: u32| Candidate { members: (0..n).map(ObjectId).collect(), start: 0, end: 0, lifetime: life };
        assert_eq!(refinement_unit(&[c(3, 2)]), 18);
        assert_eq!(refinement_unit(&[]), 0);
        assert_eq!(refinement_unit(&[c(2, 5), c(4, 1)]), 36);
    }

    #[test]
    fn accuracy_edge_cases() {
        let conv = Convoy { members: set(&[1, 2]), start: 1, end: 3 };
        let cand = Candidate { members: set(&[1, 2]), start: 1, end: 3, lifetime: 3 };
        assert_eq!(accuracy_report(&[conv.clone()], &[cand]), Accuracy { false_positive_pct: 0.0, false_negative_pct: 0.0 });
        assert_eq!(accuracy_report(&[conv], &[]), Accuracy { false_positive_pct: 0.0, false_negative_pct: 100.0 });
        assert_eq!(accuracy_report(&[], &[]), Accuracy { false_positive_pct: 0.0, false_negative_pct: 0.0 });
    }

    #[test]
    fn mc2_rejects_bad_theta() {
        assert_eq!(mc2(&[], 0.0, 1.0, 2), Err(ConvoyError::Theta(0.0)));
        assert_eq!(mc2(&[], 1.5, 1.0, 2), Err(ConvoyError::Theta(1.5)));
    }

    #[test]
    fn brute_force_guards_scale() {
        let o: Vec<_> = (0..65).map(|i| traj(i, &[(0.0, 0.0, 0)])).collect();
        let q = QueryParams::new(2, 1, 1.0).unwrap();
        assert!(matches!(brute_force(&o, &q), Err(ConvoyError::ScaleGuard { objects: 65, .. })));
    }
}
