//! Density-based clustering of snapshot positions and of simplified polylines.
//!
//! Snapshot clustering is plain DBSCAN over object positions at one tick.
//! Polyline clustering treats each object's simplified polyline inside a time
//! partition as one "point" and replaces the `e`-neighbourhood with a
//! conservative range search: two objects are neighbours unless the distance
//! between their segments, minus both segments' actual tolerances, rules out
//! every tick at which their original positions could be within `e`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{dist_bb, dist_pp, dist_ss, dist_star, mbb, BoundingBox, Point2};
use crate::simplify::Segment;
use crate::trajectory::{ObjectId, Partition, Polyline, Tick};

/// Which segment distance backs the range search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RangeSearchMode {
    /// Shortest spatial distance between segments; for DP and DP+ output.
    Ll,
    /// Distance at the closest point of approach in time; for DP* output only.
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClusterContext {
    Free,
    Snapshot(Tick),
    Partition(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cluster {
    pub members: BTreeSet<ObjectId>,
    pub context: ClusterContext,
}

#[derive(Clone, Copy, PartialEq)]
enum BorderPolicy {
    /// A border point joins the cluster of its lowest-id core neighbour.
    LowestCore,
    /// A border point joins every cluster it is reachable from.
    All,
}

/// DBSCAN over `n` items indexed in ascending id order. `nbrs[i]` excludes `i`.
fn dbscan_core(nbrs: &[Vec<usize>], m: usize, border: BorderPolicy) -> Vec<Vec<usize>> {
    let n = nbrs.len();
    let core: Vec<bool> = nbrs.iter().map(|v| v.len() + 1 >= m).collect();
    let mut comp = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if !core[s] || comp[s] != usize::MAX {
            continue;
        }
        let c = clusters.len();
        let mut members = vec![s];
        comp[s] = c;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &nbrs[u] {
                if core[v] && comp[v] == usize::MAX {
                    comp[v] = c;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        clusters.push(members);
    }
    for p in 0..n {
        if core[p] {
            continue;
        }
        match border {
            BorderPolicy::LowestCore => {
                if let Some(&q) = nbrs[p].iter().filter(|&&q| core[q]).min() {
                    clusters[comp[q]].push(p);
                }
            }
            BorderPolicy::All => {
                let mut seen: Vec<usize> = nbrs[p].iter().filter(|&&q| core[q]).map(|&q| comp[q]).collect();
                seen.sort_unstable();
                seen.dedup();
                for c in seen {
                    clusters[c].push(p);
                }
            }
        }
    }
    clusters
}

/// DBSCAN over positions at one instant.
///
/// A point is core when its closed `e`-neighbourhood (itself included) holds
/// at least `m` points. Cores reachable from each other form one cluster; a
/// non-core point within `e` of a core joins the cluster of its lowest-id
/// core neighbour. Clusters smaller than `m` are never returned.
pub fn dbscan_points(points: &[(ObjectId, Point2)], e: f64, m: usize) -> Vec<Cluster> {
    let mut pts: Vec<(ObjectId, Point2)> = points.to_vec();
    pts.sort_by_key(|p| p.0);
    let n = pts.len();
    let mut nbrs = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dist_pp(pts[i].1, pts[j].1) <= e {
                nbrs[i].push(j);
                nbrs[j].push(i);
            }
        }
    }
    collect(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), dbscan_core(&nbrs, m, BorderPolicy::LowestCore), m, ClusterContext::Free)
}

fn collect(ids: &[ObjectId], groups: Vec<Vec<usize>>, m: usize, context: ClusterContext) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = groups
        .into_iter()
        .filter(|g| g.len() >= m)
        .map(|g| Cluster { members: g.into_iter().map(|i| ids[i]).collect(), context })
        .collect();
    out.sort();
    out
}

/// Slack added to the pruning radius so rounding can never turn an exact tie
/// into a false dismissal.
fn slack(radius: f64) -> f64 {
    1e-9 * (1.0 + radius.abs())
}

/// True when a lower bound `bound` on the segment distance proves the original
/// positions are farther than `e` apart at every shared tick.
pub fn exceeds_bound(bound: f64, e: f64, tol_q: f64, tol_i: f64) -> bool {
    let radius = e + tol_q + tol_i;
    bound > radius + slack(radius)
}

fn segment_bound(a: &Segment, b: &Segment, mode: RangeSearchMode) -> f64 {
    match mode {
        RangeSearchMode::Ll => dist_ss(&a.geometry, &b.geometry),
        RangeSearchMode::Star => dist_star(&a.geometry, &b.geometry),
    }
}

/// Indices of `segs` (time ordered) whose interval intersects `[lo, hi]`.
fn overlapping(segs: &[Segment], lo: Tick, hi: Tick) -> &[Segment] {
    let a = segs.partition_point(|s| s.geometry.t_end < lo);
    let b = segs.partition_point(|s| s.geometry.t_start <= hi);
    if a >= b {
        &[]
    } else {
        &segs[a..b]
    }
}

/// Per-polyline summary used for the whole-object prune.
#[derive(Debug, Clone, Copy)]
struct Summary {
    bbox: BoundingBox,
    max_tol: f64,
    start: Tick,
    end: Tick,
}

fn summarize(segs: &[Segment]) -> Option<Summary> {
    let first = segs.first()?;
    let last = segs.last()?;
    let mut bbox = first.geometry.bbox();
    let mut max_tol = first.actual_tolerance;
    for s in &segs[1..] {
        bbox = bbox.union(&s.geometry.bbox());
        max_tol = max_tol.max(s.actual_tolerance);
    }
    Some(Summary { bbox, max_tol, start: first.geometry.t_start, end: last.geometry.t_end })
}

fn may_meet(q: &[Segment], qs: &Summary, i: &[Segment], is: &Summary, e: f64, mode: RangeSearchMode) -> bool {
    if qs.start.max(is.start) > qs.end.min(is.end) {
        return false;
    }
    if exceeds_bound(dist_bb(&qs.bbox, &is.bbox), e, qs.max_tol, is.max_tol) {
        return false;
    }
    for lq in q {
        let group = overlapping(i, lq.geometry.t_start, lq.geometry.t_end);
        if group.is_empty() {
            continue;
        }
        let Some(gs) = summarize(group) else { continue };
        if exceeds_bound(dist_bb(&lq.geometry.bbox(), &gs.bbox), e, lq.actual_tolerance, gs.max_tol) {
            continue;
        }
        for li in group {
            if !exceeds_bound(segment_bound(lq, li, mode), e, lq.actual_tolerance, li.actual_tolerance) {
                return true;
            }
        }
    }
    false
}

/// Objects of `all` (other than `q`'s owner) whose original trajectories may
/// come within `e` of `q`'s owner at some tick covered by both polylines.
///
/// Runs a time-overlap scan, then a box prune per group of overlapping
/// segments, then the per-pair segment bound. Always a superset of the true
/// neighbours.
pub fn neighborhood_polylines(q: &Polyline, all: &Partition, e: f64, mode: RangeSearchMode) -> Vec<ObjectId> {
    let Some(qs) = summarize(&q.segments) else {
        return Vec::new();
    };
    all.polylines
        .iter()
        .filter(|p| p.owner != q.owner)
        .filter(|p| summarize(&p.segments).is_some_and(|ps| may_meet(&q.segments, &qs, &p.segments, &ps, e, mode)))
        .map(|p| p.owner)
        .collect()
}

/// Smallest `D_LL − δ(l_q) − δ(l_i)` over time-overlapping segment pairs, or
/// `f64::INFINITY` when no pair shares time. A value above `e` rules out any
/// tick with the two original positions within `e`.
pub fn omega(a: &[Segment], b: &[Segment]) -> f64 {
    let mut best = f64::INFINITY;
    for lq in a {
        for li in overlapping(b, lq.geometry.t_start, lq.geometry.t_end) {
            best = best.min(dist_ss(&lq.geometry, &li.geometry) - lq.actual_tolerance - li.actual_tolerance);
        }
    }
    best
}

/// DBSCAN over the object polylines of one partition.
///
/// Core objects need at least `m` objects (themselves included) in their
/// expanded neighbourhood. Non-core objects join every cluster whose cores
/// reach them, so clusters may overlap; that keeps every snapshot cluster of
/// the original positions inside some returned cluster.
pub fn traj_dbscan(partition: &Partition, e: f64, m: usize, mode: RangeSearchMode) -> Vec<Cluster> {
    let lines = &partition.polylines;
    let summaries: Vec<Option<Summary>> = lines.iter().map(|p| summarize(&p.segments)).collect();
    let n = lines.len();
    let mut nbrs = vec![Vec::new(); n];
    for a in 0..n {
        let Some(sa) = &summaries[a] else { continue };
        for b in a + 1..n {
            let Some(sb) = &summaries[b] else { continue };
            if may_meet(&lines[a].segments, sa, &lines[b].segments, sb, e, mode) {
                nbrs[a].push(b);
                nbrs[b].push(a);
            }
        }
    }
    let ids: Vec<ObjectId> = lines.iter().map(|p| p.owner).collect();
    collect(&ids, dbscan_core(&nbrs, m, BorderPolicy::All), m, ClusterContext::Partition(partition.index))
}

/// Box of a non-empty segment set.
pub fn segments_bbox(segs: &[Segment]) -> Option<BoundingBox> {
    let g: Vec<_> = segs.iter().map(|s| s.geometry).collect();
    mbb(&g).ok()
}
