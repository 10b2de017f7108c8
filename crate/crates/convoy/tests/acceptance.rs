//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use convoy::synth::{generate, random_spec, Synthetic, SyntheticSpec};
use convoy::{read_csv_file, PlantedConvoy};
use convoy_core::clustering::{exceeds_bound, segments_bbox};
use convoy_core::exec::Sequential;
use convoy_core::geometry::{dist_bb, dist_pp, dist_ss, dist_star};
use convoy_core::simplify::{recompute_tolerance, reduction_ratio, simplify};
use convoy_core::{
    accuracy_report, brute_force, cmc, compute_delta, compute_lambda, cuts_filter, discover, discover_with, mc2,
    refinement_unit, Candidate, ObjectId, QueryParams, Simplifier, TimeDomain, TimedPoint, Trajectory, Variant,
    VariantConfig,
};
use convoy::runtime::WallClock;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CUTS: [Variant; 3] = [Variant::Cuts, Variant::CutsPlus, Variant::CutsStar];
const SIMPLIFIERS: [Simplifier; 3] = [Simplifier::Dp, Simplifier::DpPlus, Simplifier::DpStar];

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// The hundred small scenes shared by several criteria.
fn small_scenes() -> Vec<(Synthetic, QueryParams)> {
    (0..100u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(4..=20);
            let t = rng.random_range(10..=50);
            let count = rng.random_range(0..=3);
            let mut spec = random_spec(&mut rng, n, t, 1.0, count, 4);
            spec.area = rng.random_range(4.0..15.0);
            spec.speed = rng.random_range(0.2..0.8);
            spec.missing = if rng.random_bool(0.7) { rng.random_range(0.0..0.3) } else { 0.0 };
            spec.irregular = rng.random_bool(0.5);
            let q = QueryParams::new(rng.random_range(2..=3), rng.random_range(2..=6), 1.0).unwrap();
            (generate(&spec, seed).unwrap(), q)
        })
        .collect()
}

fn exactness(scenes: &[(Synthetic, QueryParams)]) -> Outcome {
    let mut convoys = 0;
    for (i, (s, q)) in scenes.iter().enumerate() {
        let o = &s.data.trajectories;
        let truth = brute_force(o, q).map_err(|e| format!("scene {i}: {e}"))?;
        if cmc(o, q) != truth {
            return Err(format!("scene {i}: cmc differs from brute force"));
        }
        for v in CUTS {
            let got = discover(o, q, v, None, None).map_err(|e| e.to_string())?;
            if got.convoys != truth {
                return Err(format!("scene {i}: {v} differs from brute force"));
            }
        }
        convoys += truth.len();
    }
    Ok(format!("{} scenes, {convoys} convoys, all five algorithms equal", scenes.len()))
}

fn walk(rng: &mut ChaCha8Rng, id: u32, len: u32) -> Trajectory {
    let (mut x, mut y) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
    let mut pts = Vec::new();
    for t in 0..len {
        if t == 0 || t == len - 1 || rng.random_bool(0.85) {
            pts.push(TimedPoint::new(x, y, t));
        }
        x += rng.random_range(-1.0..1.0);
        y += rng.random_range(-1.0..1.0);
    }
    Trajectory::new(ObjectId(id), pts).unwrap()
}

fn meets(a: &Trajectory, b: &Trajectory, lo: u32, hi: u32, e: f64) -> bool {
    (lo..=hi).any(|t| match (a.sample_at(t), b.sample_at(t)) {
        (Some(p), Some(q)) => dist_pp(p, q) <= e,
        _ => false,
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Bound {
    Segment,
    Box,
    Approach,
}

/// `(trials, pruned, violations)` over 10⁵ segment pairs.
fn bound_fuzz(bound: Bound, seed: u64) -> (usize, usize, usize) {
    let simplifier = match bound {
        Bound::Segment => Simplifier::Dp,
        Bound::Box => Simplifier::DpPlus,
        Bound::Approach => Simplifier::DpStar,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut trials, mut pruned, mut bad) = (0, 0, 0);
    while trials < 100_000 {
        let len = rng.random_range(3..30);
        let a = walk(&mut rng, 0, len);
        let b = walk(&mut rng, 1, len);
        let delta = rng.random_range(0.0..1.5);
        let e = rng.random_range(0.2..3.0);
        let sa = simplify(&a, delta, simplifier);
        let sb = simplify(&b, delta, simplifier);
        for lq in &sa.segments {
            let group = sb.segments_within(lq.geometry.t_start, lq.geometry.t_end);
            if group.is_empty() {
                continue;
            }
            match bound {
                Bound::Box => {
                    trials += 1;
                    let max_tol = group.iter().map(|s| s.actual_tolerance).fold(0.0, f64::max);
                    let bb = segments_bbox(group).unwrap();
                    if exceeds_bound(dist_bb(&lq.geometry.bbox(), &bb), e, lq.actual_tolerance, max_tol) {
                        pruned += 1;
                        bad += usize::from(meets(&a, &b, lq.geometry.t_start, lq.geometry.t_end, e));
                    }
                }
                Bound::Segment | Bound::Approach => {
                    for li in group {
                        trials += 1;
                        let bound = if bound == Bound::Segment {
                            dist_ss(&lq.geometry, &li.geometry)
                        } else {
                            dist_star(&lq.geometry, &li.geometry)
                        };
                        if exceeds_bound(bound, e, lq.actual_tolerance, li.actual_tolerance) {
                            pruned += 1;
                            let (lo, hi) = lq.geometry.common_interval(&li.geometry).unwrap();
                            bad += usize::from(meets(&a, &b, lo, hi, e));
                        }
                    }
                }
            }
        }
    }
    (trials, pruned, bad)
}

fn bound_soundness() -> Outcome {
    let mut parts = Vec::new();
    for (name, bound, seed) in [("segment", Bound::Segment, 11), ("box", Bound::Box, 12), ("approach", Bound::Approach, 13)] {
        let (trials, pruned, bad) = bound_fuzz(bound, seed);
        if bad > 0 {
            return Err(format!("{name} prune: {bad} violations in {trials} trials"));
        }
        parts.push(format!("{name} {pruned}/{trials} pruned"));
    }
    Ok(format!("0 violations ({})", parts.join(", ")))
}

fn filter_safety(scenes: &[(Synthetic, QueryParams)]) -> Outcome {
    let mut checks = 0;
    for (i, (s, q)) in scenes.iter().enumerate() {
        let o = &s.data.trajectories;
        let truth = cmc(o, q);
        let ticks = TimeDomain::of(o).unwrap().len();
        let auto_delta = compute_delta(o, q.e, 0.1).delta;
        for simplifier in SIMPLIFIERS {
            for delta in [auto_delta, 2.0 * auto_delta] {
                let simplified: Vec<_> = o.iter().map(|t| simplify(t, delta, simplifier)).collect();
                let auto_lambda = compute_lambda(o, &simplified, ticks);
                for lambda in [2, auto_lambda, 2 * auto_lambda] {
                    let cfg = VariantConfig::new(simplifier, delta, lambda);
                    let out = cuts_filter(o, q, &cfg).map_err(|e| e.to_string())?;
                    for c in &truth {
                        let covered = out
                            .candidates
                            .iter()
                            .any(|v| v.members.is_superset(&c.members) && v.start <= c.start && v.end >= c.end);
                        if !covered {
                            return Err(format!("scene {i} {simplifier} delta={delta} lambda={lambda}: {c:?} uncovered"));
                        }
                        checks += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{} scenes, {checks} convoy/configuration pairs covered", scenes.len()))
}

fn deviation_bounds(scenes: &[(Synthetic, QueryParams)]) -> Outcome {
    let mut segments = 0;
    for (s, q) in scenes {
        let o = &s.data.trajectories;
        let auto = compute_delta(o, q.e, 0.1).delta;
        for simplifier in SIMPLIFIERS {
            for delta in [0.0, auto, 0.5, 2.0] {
                for t in o {
                    for seg in simplify(t, delta, simplifier).segments {
                        let again = recompute_tolerance(t, &seg, simplifier);
                        if again != seg.actual_tolerance || seg.actual_tolerance > delta {
                            return Err(format!(
                                "{simplifier} delta={delta}: stored {} recomputed {again}",
                                seg.actual_tolerance
                            ));
                        }
                        segments += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{segments} segments exact and within tolerance"))
}

fn refinement_unit_example() -> Outcome {
    let c = Candidate { members: (0..3).map(ObjectId).collect(), start: 1, end: 2, lifetime: 2 };
    match refinement_unit(&[c]) {
        18 => Ok("3 members x lifetime 2 = 18".into()),
        other => Err(format!("got {other}")),
    }
}

fn trends() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let walks: Vec<Trajectory> = (0..60)
        .map(|i| {
            let mut pts = Vec::new();
            let (mut x, mut y) = (0.0, 0.0);
            for t in 0..300 {
                pts.push(TimedPoint::new(x, y, t));
                x += rng.random_range(-1.0..1.0);
                y += rng.random_range(-1.0..1.0);
            }
            Trajectory::new(ObjectId(i), pts).unwrap()
        })
        .collect();
    let delta = 1.0;
    let dp: Vec<_> = walks.iter().map(|o| simplify(o, delta, Simplifier::Dp)).collect();
    let star: Vec<_> = walks.iter().map(|o| simplify(o, delta, Simplifier::DpStar)).collect();
    let (r_dp, r_star) = (reduction_ratio(&dp), reduction_ratio(&star));
    if r_dp < r_star {
        return Err(format!("reduction dp {r_dp:.3} < dp* {r_star:.3}"));
    }

    let (mut units_ll, mut units_star) = (0u64, 0u64);
    let scenes = 30;
    for seed in 0..scenes {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let mut spec = random_spec(&mut rng, 40, 120, 1.0, 5, 10);
        spec.area = 25.0;
        spec.speed = 0.6;
        let s = generate(&spec, 700 + seed).unwrap();
        let o = &s.data.trajectories;
        let q = QueryParams::new(3, 8, 1.0).unwrap();
        let delta = compute_delta(o, q.e, 0.1).delta;
        let simplified: Vec<_> = o.iter().map(|t| simplify(t, delta, Simplifier::Dp)).collect();
        let lambda = compute_lambda(o, &simplified, TimeDomain::of(o).unwrap().len());
        for (simplifier, acc) in [(Simplifier::Dp, &mut units_ll), (Simplifier::DpStar, &mut units_star)] {
            let out = cuts_filter(o, &q, &VariantConfig::new(simplifier, delta, lambda)).map_err(|e| e.to_string())?;
            *acc += refinement_unit(&out.candidates);
        }
    }
    let (mean_ll, mean_star) = (units_ll as f64 / scenes as f64, units_star as f64 / scenes as f64);
    if mean_star > mean_ll {
        return Err(format!("mean refinement units cuts* {mean_star:.1} > cuts {mean_ll:.1}"));
    }
    Ok(format!(
        "reduction dp {r_dp:.3} >= dp* {r_star:.3}; mean refinement units cuts* {mean_star:.1} <= cuts {mean_ll:.1}"
    ))
}

fn speedup() -> Outcome {
    let spec = SyntheticSpec {
        objects: 100,
        ticks: 2000,
        e: 1.0,
        convoys: (0..12)
            .map(|i| {
                let start = 150 * i + 20;
                PlantedConvoy { size: 3 + (i as usize % 3), start, end: start + 100 + (i * 67) % 200, jitter: 0.45 }
            })
            .collect(),
        area: 60.0,
        speed: 0.5,
        missing: 0.05,
        irregular: true,
    };
    let s = generate(&spec, 2024).unwrap();
    let o = &s.data.trajectories;
    let q = QueryParams::new(3, 20, 1.0).unwrap();
    let started = Instant::now();
    let reference = discover_with(o, &q, Variant::Cmc, None, None, &Sequential, &WallClock).map_err(|e| e.to_string())?;
    let cmc_ms = started.elapsed().as_secs_f64() * 1000.0;
    let started = Instant::now();
    let fast = discover_with(o, &q, Variant::CutsStar, None, None, &Sequential, &WallClock).map_err(|e| e.to_string())?;
    let star_ms = started.elapsed().as_secs_f64() * 1000.0;
    if fast.convoys != reference.convoys {
        return Err("cuts* result differs from cmc".into());
    }
    let ratio = cmc_ms / star_ms;
    if star_ms > cmc_ms {
        return Err(format!("cuts* {star_ms:.0} ms slower than cmc {cmc_ms:.0} ms"));
    }
    let warn = if ratio < 2.0 { " (warning: below 2x)" } else { "" };
    Ok(format!(
        "cmc {cmc_ms:.0} ms, cuts* {star_ms:.0} ms, speedup {ratio:.1}x{warn}; {} convoys, delta {:.3}, lambda {}",
        reference.convoys.len(),
        fast.stats.delta.unwrap_or(f64::NAN),
        fast.stats.lambda.unwrap_or(0)
    ))
}

fn mc2_inadequacy() -> Outcome {
    let q = QueryParams::new(3, 3, 1.0).unwrap();
    let a = read_csv_file(&fixture("lossy_overlap.csv")).map_err(|e| e.to_string())?;
    let b = read_csv_file(&fixture("drifting_group.csv")).map_err(|e| e.to_string())?;
    let acc_a = accuracy_report(&cmc(&a.trajectories, &q), &mc2(&a.trajectories, 1.0, q.e, q.m).unwrap());
    let acc_b = accuracy_report(&cmc(&b.trajectories, &q), &mc2(&b.trajectories, 0.5, q.e, q.m).unwrap());
    if acc_a.false_negative_pct > 0.0 && acc_b.false_positive_pct > 0.0 {
        Ok(format!(
            "theta=1 false negatives {:.0}%, theta=1/2 false positives {:.0}%",
            acc_a.false_negative_pct, acc_b.false_positive_pct
        ))
    } else {
        Err(format!("fn {:.0}% fp {:.0}%", acc_a.false_negative_pct, acc_b.false_positive_pct))
    }
}

fn cli_golden() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_convoy");
    let mut runs = 0;
    for name in ["pair_convoy", "chained"] {
        let expected = std::fs::read_to_string(fixture(&format!("{name}.expected"))).map_err(|e| e.to_string())?;
        for algo in ["cmc", "cuts", "cuts+", "cuts*"] {
            let out = Command::new(bin)
                .args(["run", "--algo", algo, "--m", "2", "--k", "3", "--e", "1", "--input"])
                .arg(fixture(&format!("{name}.csv")))
                .output()
                .map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(format!("{name} {algo}: exit {:?}", out.status.code()));
            }
            if out.stdout != expected.as_bytes() {
                return Err(format!("{name} {algo}: got {:?}", String::from_utf8_lossy(&out.stdout)));
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} runs byte-identical to golden output"))
}

fn main() {
    let scenes = small_scenes();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 exactness", Box::new(|| exactness(&scenes))),
        ("2 pruning bound soundness", Box::new(bound_soundness)),
        ("3 filter safety", Box::new(|| filter_safety(&scenes))),
        ("4 deviation bounds", Box::new(|| deviation_bounds(&scenes))),
        ("5 refinement unit", Box::new(refinement_unit_example)),
        ("6 trends", Box::new(trends)),
        ("7 speedup direction", Box::new(speedup)),
        ("8 mc2 inadequacy", Box::new(mc2_inadequacy)),
        ("9 cli golden files", Box::new(cli_golden)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
