//! On-disk formats: CSV and JSON-lines dumps, and JSON reports.
//!
//! Every reader accepts exactly what the matching writer produces and
//! returns `Error::Parse` on anything else.

use std::io::{BufRead, BufReader, Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::competition::InterfaceTrace;
use crate::error::{Error, Result};
use crate::exclusion::{CouplingReport, Event, EventKind, Trajectory};
use crate::lattice::{is_up_right_path, Site};
use crate::lpp::{Parent, PassageGrid};

/// One row of a passage-grid dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub i: i64,
    pub j: i64,
    #[serde(rename = "G")]
    pub g: f64,
    pub parent: char,
}

/// One step of a competition-interface dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: usize,
    pub i: i64,
    pub j: i64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRecord {
    pub seed: u64,
    pub n: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationRecord {
    pub seed: u64,
    pub n: usize,
    pub deviation: f64,
    pub g_minus_mu: f64,
}

/// Whether two geodesics to the target at radius `r` in direction `alpha`
/// (degrees) share a site, and the first shared site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceRecord {
    pub seed: u64,
    pub alpha: f64,
    pub r: f64,
    pub coalesced: bool,
    pub c_i: Option<i64>,
    pub c_j: Option<i64>,
}

/// One line of a trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub kind: EventKind,
    pub x: i64,
    pub label_i: Option<i64>,
    pub label_j: Option<i64>,
    #[serde(rename = "X")]
    pub tracked: Option<i64>,
}

impl From<&Event> for TrajectoryRecord {
    fn from(e: &Event) -> Self {
        TrajectoryRecord {
            t: e.t,
            kind: e.kind,
            x: e.x,
            label_i: e.hole_label,
            label_j: e.particle_label,
            tracked: e.tracked,
        }
    }
}

fn write_csv<T: Serialize>(w: impl Write, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

fn read_csv<T: DeserializeOwned>(r: impl Read) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

fn write_jsonl<T: Serialize>(mut w: impl Write, rows: impl IntoIterator<Item = T>) -> Result<()> {
    for row in rows {
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn read_jsonl<T: DeserializeOwned>(r: impl Read) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (k, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)))?,
        );
    }
    Ok(out)
}

pub fn write_grid_csv(w: impl Write, grid: &PassageGrid) -> Result<()> {
    write_csv(
        w,
        grid.cells().map(|(z, g, p)| GridRecord {
            i: z.i,
            j: z.j,
            g,
            parent: p.tag(),
        }),
    )
}

pub fn read_grid_csv(r: impl Read) -> Result<Vec<GridRecord>> {
    let rows: Vec<GridRecord> = read_csv(r)?;
    for row in &rows {
        if Parent::from_tag(row.parent).is_none() {
            return Err(Error::Parse(format!("unknown parent tag {:?}", row.parent)));
        }
        if !row.g.is_finite() {
            return Err(Error::Parse(format!(
                "non-finite passage time at ({}, {})",
                row.i, row.j
            )));
        }
    }
    Ok(rows)
}

pub fn write_trace_jsonl(w: impl Write, trace: &InterfaceTrace) -> Result<()> {
    write_jsonl(
        w,
        trace
            .phi
            .iter()
            .zip(&trace.taus)
            .enumerate()
            .map(|(n, (z, &tau))| TraceRecord {
                n,
                i: z.i,
                j: z.j,
                tau,
            }),
    )
}

pub fn read_trace_jsonl(r: impl Read) -> Result<InterfaceTrace> {
    let rows: Vec<TraceRecord> = read_jsonl(r)?;
    if rows.is_empty() {
        return Err(Error::Parse("empty trace".into()));
    }
    if let Some((k, row)) = rows.iter().enumerate().find(|(k, row)| row.n != *k) {
        return Err(Error::Parse(format!("record {k} has step index {}", row.n)));
    }
    let phi: Vec<Site> = rows.iter().map(|r| Site::new(r.i, r.j)).collect();
    let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    if !is_up_right_path(&phi) {
        return Err(Error::Parse("trace is not an up/right path".into()));
    }
    if taus.iter().any(|t| !t.is_finite()) || taus.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Parse(
            "trace times are not finite and nondecreasing".into(),
        ));
    }
    Ok(InterfaceTrace { phi, taus })
}

pub fn write_angle_csv(w: impl Write, rows: &[AngleRecord]) -> Result<()> {
    write_csv(w, rows)
}

pub fn read_angle_csv(r: impl Read) -> Result<Vec<AngleRecord>> {
    read_csv(r)
}

pub fn write_deviation_csv(w: impl Write, rows: &[DeviationRecord]) -> Result<()> {
    write_csv(w, rows)
}

pub fn read_deviation_csv(r: impl Read) -> Result<Vec<DeviationRecord>> {
    read_csv(r)
}

pub fn write_coalescence_csv(w: impl Write, rows: &[CoalescenceRecord]) -> Result<()> {
    write_csv(w, rows)
}

pub fn read_coalescence_csv(r: impl Read) -> Result<Vec<CoalescenceRecord>> {
    let rows: Vec<CoalescenceRecord> = read_csv(r)?;
    for row in &rows {
        if row.coalesced != (row.c_i.is_some() && row.c_j.is_some()) {
            return Err(Error::Parse(format!(
                "seed {}: coalescence flag disagrees with the coalescence site",
                row.seed
            )));
        }
    }
    Ok(rows)
}

pub fn write_trajectory_jsonl(w: impl Write, trajectory: &Trajectory) -> Result<()> {
    write_jsonl(w, trajectory.events.iter().map(TrajectoryRecord::from))
}

pub fn read_trajectory_jsonl(r: impl Read) -> Result<Vec<TrajectoryRecord>> {
    let rows: Vec<TrajectoryRecord> = read_jsonl(r)?;
    if rows.windows(2).any(|w| !(w[0].t <= w[1].t)) {
        return Err(Error::Parse(
            "trajectory times are not nondecreasing".into(),
        ));
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(mut w: impl Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_coupling_report(r: impl Read) -> Result<CouplingReport> {
    Ok(serde_json::from_reader(r)?)
}
