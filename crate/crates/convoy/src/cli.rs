//! Command-line surface.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use convoy_core::simplify::simplify;
use convoy_core::{
    accuracy_report, cmc, discover_with, mc2, Candidate, Convoy, ConvoyError, QueryParams, Simplifier, Tick, TimedPoint,
    Trajectory, Variant,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::io::{read_csv_file, write_csv, Dataset, LoadError};
use crate::report::{format_accuracy, format_candidates, format_convoys, StatsFormat, StatsRecord};
use crate::runtime::{Pool, WallClock};
use crate::synth::{generate, random_spec, SpecError, SyntheticSpec};

#[derive(Debug, Parser)]
#[command(name = "convoy", version, about = "Discover convoys in trajectory data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm and write its result.
    Run(RunArgs),
    /// Score an algorithm's output against a reference algorithm.
    Compare(CompareArgs),
    /// Write a seeded synthetic scene as CSV.
    Generate(GenerateArgs),
    /// Simplify every trajectory and write the retained samples as CSV.
    Simplify(SimplifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Cmc,
    Cuts,
    #[value(name = "cuts+")]
    CutsPlus,
    #[value(name = "cuts*")]
    CutsStar,
    Mc2,
}

impl Algo {
    fn variant(self) -> Option<Variant> {
        match self {
            Algo::Cmc => Some(Variant::Cmc),
            Algo::Cuts => Some(Variant::Cuts),
            Algo::CutsPlus => Some(Variant::CutsPlus),
            Algo::CutsStar => Some(Variant::CutsStar),
            Algo::Mc2 => None,
        }
    }

    fn name(self) -> &'static str {
        self.variant().map_or("mc2", Variant::name)
    }
}

#[derive(Debug, Clone, Args)]
pub struct QueryArgs {
    /// Input CSV with rows `obj,t,x,y`.
    #[arg(long)]
    pub input: PathBuf,
    /// Minimum number of objects.
    #[arg(long)]
    pub m: usize,
    /// Minimum lifetime in ticks.
    #[arg(long)]
    pub k: u32,
    /// Neighbourhood range.
    #[arg(long)]
    pub e: f64,
    /// Simplification tolerance (CuTS family); chosen automatically if absent.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Partition length in ticks (CuTS family); chosen automatically if absent.
    #[arg(long)]
    pub lambda: Option<Tick>,
    /// Overlap threshold for moving clusters.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Worker threads for simplification and refinement.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Result file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Statistics file.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StatsFormat::Text)]
    pub stats_format: StatsFormat,
    /// Candidate dump (CuTS family): `ids start end lifetime` per line.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Algorithm under test.
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Algorithm that defines the true result.
    #[arg(long, value_enum, default_value_t = Algo::Cmc)]
    pub reference: Algo,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub objects: usize,
    #[arg(long, default_value_t = 50)]
    pub ticks: Tick,
    #[arg(long, default_value_t = 1.0)]
    pub e: f64,
    /// Number of planted convoys.
    #[arg(long, default_value_t = 2)]
    pub convoys: usize,
    /// Shortest planted convoy in ticks.
    #[arg(long, default_value_t = 5)]
    pub min_length: Tick,
    /// Probability of dropping a sample that no planted convoy depends on.
    #[arg(long, default_value_t = 0.0)]
    pub missing: f64,
    /// Random start and end ticks for objects outside planted convoys.
    #[arg(long)]
    pub irregular: bool,
    /// JSON scene description; replaces the shape flags above.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Where to write the planted convoys.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimplifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_simplifier)]
    pub simplifier: Simplifier,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_simplifier(s: &str) -> Result<Simplifier, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Load { path: PathBuf, source: LoadError },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Spec(_) => 2,
            CliError::Load { .. } | CliError::Data(_) => 3,
            CliError::Write { .. } => 1,
        }
    }
}

impl From<ConvoyError> for CliError {
    fn from(e: ConvoyError) -> Self {
        match e {
            ConvoyError::Trajectory(t) => CliError::Data(t.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Write { path: p.to_path_buf(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

fn load(path: &Path) -> Result<Dataset, CliError> {
    read_csv_file(path).map_err(|source| CliError::Load { path: path.to_path_buf(), source })
}

struct Outcome {
    convoys: Vec<Convoy>,
    candidates: Vec<Candidate>,
    record: Option<StatsRecord>,
}

fn execute(data: &Dataset, q: &QueryArgs, algo: Algo) -> Result<Outcome, CliError> {
    let params = QueryParams::new(q.m, q.k, q.e)?;
    if q.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let o = &data.trajectories;
    match algo.variant() {
        Some(v) => {
            let pool = Pool::new(q.threads).map_err(|e| CliError::Usage(e.to_string()))?;
            let found = discover_with(o, &params, v, q.delta, q.lambda, &pool, &WallClock)?;
            let record = StatsRecord::new(algo.name(), data, &params, q.threads, &found.stats);
            Ok(Outcome { convoys: found.convoys, candidates: found.candidates, record: Some(record) })
        }
        None => {
            let chains = mc2(o, q.theta, q.e, q.m)?;
            Ok(Outcome { convoys: Vec::new(), candidates: chains, record: None })
        }
    }
}

fn as_candidates(convoys: &[Convoy]) -> Vec<Candidate> {
    convoys
        .iter()
        .map(|c| Candidate { members: c.members.clone(), start: c.start, end: c.end, lifetime: c.lifetime() })
        .collect()
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let data = load(&args.query.input)?;
    if args.algo == Algo::Mc2 {
        // Moving clusters are only ever reported through their accuracy.
        let params = QueryParams::new(args.query.m, args.query.k, args.query.e)?;
        let chains = execute(&data, &args.query, Algo::Mc2)?.candidates;
        let acc = accuracy_report(&cmc(&data.trajectories, &params), &chains);
        return emit(args.out.as_deref(), &format_accuracy("cmc", "mc2", &acc));
    }
    let outcome = execute(&data, &args.query, args.algo)?;
    emit(args.out.as_deref(), &format_convoys(&data, &outcome.convoys))?;
    if let (Some(path), Some(record)) = (&args.stats, &outcome.record) {
        emit(Some(path), &record.render(args.stats_format))?;
    }
    if let Some(path) = &args.candidates {
        emit(Some(path), &format_candidates(&data, &outcome.candidates))?;
    }
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<(), CliError> {
    if args.reference == Algo::Mc2 {
        return Err(CliError::Usage("mc2 cannot serve as the reference".into()));
    }
    let data = load(&args.query.input)?;
    let reference = execute(&data, &args.query, args.reference)?.convoys;
    let trial = execute(&data, &args.query, args.algo)?;
    let trial = if args.algo == Algo::Mc2 { trial.candidates } else { as_candidates(&trial.convoys) };
    let acc = accuracy_report(&reference, &trial);
    emit(args.out.as_deref(), &format_accuracy(args.reference.name(), args.algo.name(), &acc))
}

fn generate_cmd(args: &GenerateArgs) -> Result<(), CliError> {
    let spec: SyntheticSpec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed ^ 0x5eed);
            let mut spec = random_spec(&mut rng, args.objects, args.ticks, args.e, args.convoys, args.min_length);
            spec.missing = args.missing;
            spec.irregular = args.irregular;
            spec
        }
    };
    let scene = generate(&spec, args.seed)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &scene.data).map_err(|e| CliError::Write { path: args.out.clone(), source: e.into() })?;
    fs::write(&args.out, buf).map_err(|source| CliError::Write { path: args.out.clone(), source })?;
    if let Some(path) = &args.truth {
        emit(Some(path), &format_convoys(&scene.data, &scene.planted))?;
    }
    Ok(())
}

fn simplify_cmd(args: &SimplifyArgs) -> Result<(), CliError> {
    if !(args.delta >= 0.0 && args.delta.is_finite()) {
        return Err(CliError::Usage("--delta must be non-negative".into()));
    }
    let data = load(&args.input)?;
    let kept: Vec<Trajectory> = data
        .trajectories
        .iter()
        .map(|o| {
            let s = simplify(o, args.delta, args.simplifier);
            let mut pts: Vec<TimedPoint> = Vec::with_capacity(s.vertex_count());
            for seg in &s.segments {
                let g = seg.geometry;
                if pts.last().is_none_or(|p| p.t != g.t_start) {
                    pts.push(TimedPoint::new(g.start.x, g.start.y, g.t_start));
                }
                if g.t_end != g.t_start {
                    pts.push(TimedPoint::new(g.end.x, g.end.y, g.t_end));
                }
            }
            Trajectory::new(o.id(), pts).expect("retained samples stay ordered")
        })
        .collect();
    let out = Dataset::new(data.names().to_vec(), kept);
    let mut buf = Vec::new();
    write_csv(&mut buf, &out).map_err(|e| CliError::Write { path: "<buffer>".into(), source: e.into() })?;
    emit(args.out.as_deref(), &String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Simplify(a) => simplify_cmd(a),
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 success, 2 usage error, 3 data error, 1 output failure.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
