//! CSV time series: one header line, then one row per step. Comma-separated,
//! LF endings, floats as `{:.16e}` (17 significant digits), no locale.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use crate::diagnostics::{EnergyReport, InvariantReport};
use crate::error::{Error, Result};

/// Column order; stable within a major format version.
pub const SERIES_COLUMNS: [&str; 18] = [
    "t",
    "v4sq",
    "eta4sq",
    "beta4sq",
    "trace_term",
    "kappa_trace",
    "energy",
    "j_dev",
    "a_dev",
    "piola",
    "div_v",
    "frozen_mismatch",
    "taylor_min",
    "divb0",
    "j_kappa_dev",
    "a_kappa_dev",
    "solver_iterations",
    "wall_ms",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub energy: EnergyReport,
    pub invariants: InvariantReport,
    pub solver_iterations: u64,
    pub wall_ms: f64,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

impl SeriesRow {
    pub fn to_csv(&self) -> String {
        let e = &self.energy;
        let i = &self.invariants;
        let kt = e.kappa_trace.map(fmt).unwrap_or_default();
        let cols = [
            fmt(self.t),
            fmt(e.v4sq),
            fmt(e.eta4sq),
            fmt(e.beta4sq),
            fmt(e.trace_term),
            kt,
            fmt(e.total),
            fmt(i.j_dev),
            fmt(i.a_dev),
            fmt(i.piola),
            fmt(i.div_v),
            fmt(i.frozen_mismatch),
            fmt(i.taylor_min),
            fmt(i.divb0),
            fmt(i.j_kappa_dev),
            fmt(i.a_kappa_dev),
            self.solver_iterations.to_string(),
            fmt(self.wall_ms),
        ];
        cols.join(",")
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != SERIES_COLUMNS.len() {
            return Err(Error::Series(format!("expected {} columns, found {}", SERIES_COLUMNS.len(), cols.len())));
        }
        let f = |k: usize| -> Result<f64> {
            cols[k].parse().map_err(|_| Error::Series(format!("column {}: bad number {:?}", SERIES_COLUMNS[k], cols[k])))
        };
        let kappa_trace = if cols[5].is_empty() { None } else { Some(f(5)?) };
        Ok(Self {
            t: f(0)?,
            energy: EnergyReport { v4sq: f(1)?, eta4sq: f(2)?, beta4sq: f(3)?, trace_term: f(4)?, kappa_trace, total: f(6)? },
            invariants: InvariantReport {
                j_dev: f(7)?,
                a_dev: f(8)?,
                piola: f(9)?,
                div_v: f(10)?,
                frozen_mismatch: f(11)?,
                taylor_min: f(12)?,
                divb0: f(13)?,
                j_kappa_dev: f(14)?,
                a_kappa_dev: f(15)?,
            },
            solver_iterations: cols[16].parse().map_err(|_| Error::Series("column solver_iterations: bad integer".into()))?,
            wall_ms: f(17)?,
        })
    }
}

/// `t` of the last row in a non-empty series file, if any row exists.
fn last_time(file: &mut File) -> Result<Option<f64>> {
    let len = file.metadata()?.len();
    let start = len.saturating_sub(8192);
    file.seek(SeekFrom::Start(start))?;
    let mut tail = String::new();
    file.read_to_string(&mut tail)?;
    let last = tail.lines().rev().find(|l| !l.is_empty());
    match last {
        None => Ok(None),
        Some(l) if l.starts_with("t,") => Ok(None),
        Some(l) => {
            let t = l.split(',').next().unwrap_or("");
            t.parse().map(Some).map_err(|_| Error::Series(format!("unreadable last row {l:?}")))
        }
    }
}

/// Appends one row, writing the header first into an empty file. Rejects a
/// row whose `t` does not exceed the previous row's.
pub fn append_series(row: &SeriesRow, path: &Path) -> Result<()> {
    let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
    let empty = file.metadata()?.len() == 0;
    let mut out = String::new();
    if empty {
        out.push_str(&SERIES_COLUMNS.join(","));
        out.push('\n');
    } else if let Some(prev) = last_time(&mut file)? {
        if !(row.t > prev) {
            return Err(Error::Series(format!("time {} does not follow {}", row.t, prev)));
        }
    }
    out.push_str(&row.to_csv());
    out.push('\n');
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_series(path: &Path) -> Result<Vec<SeriesRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SERIES_COLUMNS.join(",") => {}
        _ => return Err(Error::Series("missing or unexpected header".into())),
    }
    lines.map(SeriesRow::from_csv).collect()
}
