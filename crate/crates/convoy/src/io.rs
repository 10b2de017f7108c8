//! CSV ingest and export of trajectory samples.
//!
//! One sample per row: `obj,t,x,y`. The header row is optional. Object names
//! are arbitrary strings; they are numbered in lexicographic order so that
//! object ids sort the same way as names.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use convoy_core::{ObjectId, Tick, TimedPoint, Trajectory, TrajectoryError};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("line {line}: duplicate sample for object {name} at t={t}")]
    Duplicate { line: u64, name: String, t: Tick },
    #[error("read error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Trajectories plus the names they were loaded under.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    names: Vec<String>,
    pub trajectories: Vec<Trajectory>,
}

impl Dataset {
    /// `names[i]` belongs to `ObjectId(i)`.
    pub fn new(names: Vec<String>, trajectories: Vec<Trajectory>) -> Self {
        Self { names, trajectories }
    }

    pub fn name(&self, id: ObjectId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sample_count(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }
}

fn is_header(rec: &csv::StringRecord) -> bool {
    let cols: Vec<String> = rec.iter().map(|f| f.to_ascii_lowercase()).collect();
    cols == ["obj", "t", "x", "y"]
}

pub fn read_csv<R: Read>(input: R) -> Result<Dataset, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut rows: Vec<(String, TimedPoint)> = Vec::new();
    let mut seen: HashMap<(String, Tick), u64> = HashMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && is_header(&rec) {
            continue;
        }
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let row_err = |message: String| LoadError::Row { line, message };
        if rec.len() != 4 {
            return Err(row_err(format!("expected 4 fields (obj,t,x,y), found {}", rec.len())));
        }
        let name = rec[0].to_string();
        if name.is_empty() {
            return Err(row_err("empty object name".into()));
        }
        let t: Tick = rec[1].parse().map_err(|_| row_err(format!("invalid tick {:?}", &rec[1])))?;
        let coord = |s: &str, axis: &str| -> Result<f64, LoadError> {
            let v: f64 = s.parse().map_err(|_| row_err(format!("invalid {axis} coordinate {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(row_err(format!("non-finite {axis} coordinate {s:?}")))
            }
        };
        let x = coord(&rec[2], "x")?;
        let y = coord(&rec[3], "y")?;
        if seen.insert((name.clone(), t), line).is_some() {
            return Err(LoadError::Duplicate { line, name, t });
        }
        rows.push((name, TimedPoint::new(x, y, t)));
    }
    let names: Vec<String> = rows.iter().map(|r| r.0.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let index: BTreeMap<&str, ObjectId> = names.iter().enumerate().map(|(i, n)| (n.as_str(), ObjectId(i as u32))).collect();
    let tagged: Vec<(ObjectId, TimedPoint)> = rows.iter().map(|(n, p)| (index[n.as_str()], *p)).collect();
    let trajectories = convoy_core::trajectory::assemble(tagged)?;
    Ok(Dataset::new(names, trajectories))
}

pub fn read_csv_file(path: &std::path::Path) -> Result<Dataset, LoadError> {
    let file = std::fs::File::open(path).map_err(|e| LoadError::Csv(e.into()))?;
    read_csv(std::io::BufReader::new(file))
}

/// Writes `obj,t,x,y` rows ordered by object, then tick.
pub fn write_csv<W: Write>(out: W, data: &Dataset) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["obj", "t", "x", "y"])?;
    for o in &data.trajectories {
        for p in o.points() {
            w.write_record([data.name(o.id()), &p.t.to_string(), &p.x.to_string(), &p.y.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
