//! Text formats for convoys, candidates, run statistics and accuracy reports.

use std::fmt::Write as _;

use convoy_core::convoy::Members;
use convoy_core::{Accuracy, Candidate, Convoy, QueryParams, RunStats, Tick};

use crate::io::Dataset;

fn member_names(data: &Dataset, members: &Members) -> Vec<String> {
    let mut names: Vec<String> = members.iter().map(|&id| data.name(id).to_string()).collect();
    names.sort();
    names
}

fn sorted_lines(rows: impl Iterator<Item = (Vec<String>, Tick, String)>) -> String {
    let mut rows: Vec<_> = rows.collect();
    rows.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)).then_with(|| a.2.cmp(&b.2)));
    rows.into_iter().map(|(names, _, rest)| format!("{} {rest}\n", names.join(","))).collect()
}

/// One line per convoy: `id1,id2,... start end`. Ids are sorted
/// lexicographically and lines by start tick, then ids.
pub fn format_convoys(data: &Dataset, convoys: &[Convoy]) -> String {
    sorted_lines(convoys.iter().map(|c| (member_names(data, &c.members), c.start, format!("{} {}", c.start, c.end))))
}

/// Candidate dump: `id1,id2,... start end lifetime`.
pub fn format_candidates(data: &Dataset, cands: &[Candidate]) -> String {
    sorted_lines(
        cands.iter().map(|c| (member_names(data, &c.members), c.start, format!("{} {} {}", c.start, c.end, c.lifetime))),
    )
}

/// Moving clusters (not convoys): `id1,id2,... start end`.
pub fn format_moving_clusters(data: &Dataset, chains: &[Candidate]) -> String {
    sorted_lines(chains.iter().map(|c| (member_names(data, &c.members), c.start, format!("{} {}", c.start, c.end))))
}

/// Parses a candidate dump back into `(member count, lifetime)` pairs.
pub fn parse_candidate_sizes(text: &str) -> Option<Vec<(usize, u32)>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut parts = l.split_whitespace();
            let members = parts.next()?.split(',').count();
            let lifetime = parts.nth(2)?.parse().ok()?;
            Some((members, lifetime))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StatsFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StatsRecord {
    pub algo: String,
    pub objects: usize,
    pub samples: usize,
    pub m: usize,
    pub k: u32,
    pub e: f64,
    pub delta: Option<f64>,
    pub lambda: Option<Tick>,
    pub delta_fallback: bool,
    pub threads: usize,
    pub simplify_ms: f64,
    pub filter_ms: f64,
    pub refine_ms: f64,
    pub total_ms: f64,
    pub candidates: usize,
    pub refinement_units: u64,
    pub reduction_ratio: f64,
    pub convoys: usize,
}

impl StatsRecord {
    pub fn new(algo: &str, data: &Dataset, q: &QueryParams, threads: usize, s: &RunStats) -> Self {
        Self {
            algo: algo.to_string(),
            objects: data.trajectories.len(),
            samples: data.sample_count(),
            m: q.m,
            k: q.k,
            e: q.e,
            delta: s.delta,
            lambda: s.lambda,
            delta_fallback: s.delta_fallback,
            threads,
            simplify_ms: s.simplify_ms,
            filter_ms: s.filter_ms,
            refine_ms: s.refine_ms,
            total_ms: s.total_ms,
            candidates: s.candidates,
            refinement_units: s.refinement_units,
            reduction_ratio: s.reduction_ratio,
            convoys: s.convoys,
        }
    }

    pub fn render(&self, format: StatsFormat) -> String {
        match format {
            StatsFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("stats serialize");
                s.push('\n');
                s
            }
            StatsFormat::Text => {
                let value = serde_json::to_value(self).expect("stats serialize");
                let mut out = String::new();
                for (k, v) in value.as_object().expect("stats are an object") {
                    let v = match v {
                        serde_json::Value::Null => "-".to_string(),
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let _ = writeln!(out, "{k}={v}");
                }
                out
            }
        }
    }
}

pub fn format_accuracy(reference: &str, trial: &str, a: &Accuracy) -> String {
    format!(
        "reference={reference}\ntrial={trial}\nfalse_positive_pct={:.2}\nfalse_negative_pct={:.2}\n",
        a.false_positive_pct, a.false_negative_pct
    )
}
