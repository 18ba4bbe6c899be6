use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{GridSpec, PointResult};
use crate::error::{Error, Result};
use crate::kinetics::ExcitonClass;

pub const LOG_HEADER: [&str; 11] = [
    "gamma_nr", "gamma_sf", "purcell", "period_t", "p_in", "scheme", "class", "p_out", "stderr",
    "cycles", "seed",
];

/// One (point, class) row of the result log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub gamma_nr: f64,
    pub gamma_sf: f64,
    pub purcell: f64,
    pub period_t: f64,
    pub p_in: f64,
    pub scheme: String,
    pub class: String,
    pub p_out: f64,
    pub stderr: f64,
    pub cycles: u64,
    pub seed: u64,
}

impl LogRow {
    pub fn from_point(p: &PointResult, seed_base: u64) -> Vec<LogRow> {
        ExcitonClass::ALL
            .iter()
            .map(|&class| LogRow {
                gamma_nr: p.point.params.gamma_nr,
                gamma_sf: p.point.params.gamma_sf,
                purcell: p.point.params.purcell,
                period_t: p.point.period_t,
                p_in: p.point.p_in(),
                scheme: p.point.scheme.label().to_string(),
                class: class.label().to_string(),
                p_out: p.p_out(class),
                stderr: p.stderr(class),
                cycles: p.cycles,
                seed: seed_base,
            })
            .collect()
    }
}

/// Writes `rows` with the header to any writer.
pub fn write_rows<W: Write>(out: W, rows: &[LogRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(LOG_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar holding the grid and code version next to a result log.
pub fn manifest_path(log: &Path) -> PathBuf {
    let mut s = OsString::from(log.as_os_str());
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: String,
    grid: GridSpec,
}

pub(super) struct LogWriter {
    path: PathBuf,
    file: File,
}

impl LogWriter {
    pub(super) fn append(&mut self, results: &[PointResult], seed_base: u64) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for p in results {
            for row in LogRow::from_point(p, seed_base) {
                w.serialize(row)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| self.fail(e.to_string()))?;
        self.file.write_all(&bytes)?;
        self.file.flush()?;
        Ok(())
    }

    fn fail(&self, reason: String) -> Error {
        Error::ResultLog {
            path: self.path.clone(),
            reason,
        }
    }
}

fn log_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::ResultLog {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Opens the log for appending and returns the points already on disk.
pub(super) fn open(path: &Path, spec: &GridSpec, resume: bool) -> Result<(LogWriter, Vec<PointResult>)> {
    let manifest = manifest_path(path);
    let previous = if resume && path.exists() {
        if manifest.exists() {
            let m: Manifest = serde_json::from_str(&fs::read_to_string(&manifest)?)?;
            if &m.grid != spec {
                return Err(log_error(path, "manifest describes a different grid"));
            }
        }
        read_complete(path, spec)?
    } else {
        Vec::new()
    };

    let m = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        grid: spec.clone(),
    };
    fs::write(&manifest, serde_json::to_string_pretty(&m)? + "\n")?;

    // Rewriting the complete prefix drops any point cut short by an interruption.
    let rows: Vec<LogRow> = previous
        .iter()
        .flat_map(|p| LogRow::from_point(p, spec.seed_base))
        .collect();
    write_rows(File::create(path)?, &rows)?;
    let file = OpenOptions::new().append(true).open(path)?;
    Ok((
        LogWriter {
            path: path.to_path_buf(),
            file,
        },
        previous,
    ))
}

fn read_complete(path: &Path, spec: &GridSpec) -> Result<Vec<PointResult>> {
    let text = fs::read_to_string(path)?;
    // A line without its newline was being written when the run stopped.
    let complete = match text.rfind('\n') {
        Some(end) => &text[..=end],
        None => "",
    };
    if complete.is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::Reader::from_reader(complete.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != LOG_HEADER {
        return Err(log_error(path, format!("unexpected header {header:?}")));
    }
    let rows: Vec<LogRow> = reader.deserialize().collect::<std::result::Result<_, _>>()?;

    let mut out = Vec::new();
    for (index, group) in rows.chunks_exact(ExcitonClass::ALL.len()).enumerate() {
        if index >= spec.len() {
            return Err(log_error(path, "more points than the grid holds"));
        }
        let point = spec.point(index)?;
        let mut p_out = [0.0; 5];
        let mut stderr = [0.0; 5];
        for (row, class) in group.iter().zip(ExcitonClass::ALL) {
            let matches = row.class == class.label()
                && row.gamma_nr == point.params.gamma_nr
                && row.gamma_sf == point.params.gamma_sf
                && row.purcell == point.params.purcell
                && row.period_t == point.period_t
                && row.p_in == point.p_in()
                && row.scheme == point.scheme.label()
                && row.cycles == spec.cycles_per_point
                && row.seed == spec.seed_base;
            if !matches {
                return Err(log_error(path, format!("row for point {index} does not match the grid")));
            }
            p_out[class.index()] = row.p_out;
            stderr[class.index()] = row.stderr;
        }
        out.push(PointResult {
            point,
            p_out,
            stderr,
            cycles: spec.cycles_per_point,
        });
    }
    Ok(out)
}
