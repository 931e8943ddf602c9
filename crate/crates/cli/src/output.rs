//! Result files. Every file is written to a temporary name and renamed into
//! place, so readers never see a partial file.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use holo_isac_core::optimize::RunReport;
use holo_isac_core::scenario::BeampatternGrid;
use serde::Serialize;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("moving {} into place", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    write_atomic(path, &w.into_inner()?)
}

/// `theta_deg,phi_deg,power_linear`, one row per grid sample.
pub fn write_beampattern(path: &Path, grid: &BeampatternGrid) -> Result<()> {
    let rows = grid.iter().map(|(d, p)| (d.theta_deg, d.phi_deg, p));
    write_csv(path, &["theta_deg", "phi_deg", "power_linear"], rows)
}

/// `iter,min_rate_bps_hz,slack,max_violation`, one row per outer iteration.
pub fn write_trace(path: &Path, report: &RunReport) -> Result<()> {
    let rows = report
        .iterations
        .iter()
        .map(|r| (r.iter, r.min_rate_bps_hz, r.slack, r.max_violation));
    write_csv(path, &["iter", "min_rate_bps_hz", "slack", "max_violation"], rows)
}

/// Per-iteration log, one JSON object per line: the outer iterations and
/// every holographic inner step.
pub fn write_run_log(path: &Path, report: &RunReport) -> Result<()> {
    #[derive(Serialize)]
    #[serde(tag = "event", rename_all = "snake_case")]
    enum Line<'a> {
        Outer(&'a holo_isac_core::optimize::IterationRecord),
        Holo(&'a holo_isac_core::holo::HoloTraceEntry),
    }
    let mut out = String::new();
    for r in &report.iterations {
        out.push_str(&serde_json::to_string(&Line::Outer(r))?);
        out.push('\n');
    }
    for h in &report.holo_trace {
        out.push_str(&serde_json::to_string(&Line::Holo(h))?);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Generic CSV table with a header row.
pub fn write_table<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    write_csv(path, header, rows)
}

/// CSV with a header decided at run time; rows are pre-formatted fields.
pub fn write_records(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    write_atomic(path, &w.into_inner()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beampattern_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let grid = BeampatternGrid {
            theta_deg: vec![0.0, 45.0],
            phi_deg: vec![0.0, 180.0],
            power: vec![vec![1.0, 2.0], vec![3.0, 4.5]],
        };
        let path = dir.path().join("bp.csv");
        write_beampattern(&path, &grid).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta_deg,phi_deg,power_linear");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[4], "45.0,180.0,4.5");
        assert!(!dir.path().join("bp.partial").exists());
    }
}
