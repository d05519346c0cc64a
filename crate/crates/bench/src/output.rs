//! Result files.
//!
//! * `trials.jsonl`: one [`TrialRecord`] per line.
//! * `summary.csv`: one [`CellSummary`] per (algorithm, delta).
//! * `slopes.csv`: one [`SlopeFit`] per algorithm.
//! * `plot.csv`: `algorithm,log_inv_delta,mean_tau,stderr_tau` triples.
//! * `timings.csv`: wall-clock milliseconds per trial.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::runner::{TrialRecord, TrialTiming};
use crate::summary::Summary;

pub fn write_jsonl<W: Write>(mut w: W, records: &[TrialRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn write_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PlotRow {
    algorithm: String,
    log_inv_delta: f64,
    mean_tau: f64,
    stderr_tau: f64,
}

pub fn write_outputs(dir: &Path, records: &[TrialRecord], timings: &[TrialTiming], summary: &Summary) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let trials = dir.join("trials.jsonl");
    write_jsonl(BufWriter::new(File::create(&trials).with_context(|| format!("creating {}", trials.display()))?), records)?;
    write_csv(&dir.join("summary.csv"), &summary.cells)?;
    write_csv(&dir.join("slopes.csv"), &summary.slopes)?;
    write_csv(
        &dir.join("plot.csv"),
        summary.cells.iter().map(|c| PlotRow {
            algorithm: c.algorithm.to_string(),
            log_inv_delta: c.log_inv_delta,
            mean_tau: c.mean_tau,
            stderr_tau: c.stderr_tau,
        }),
    )?;
    write_csv(&dir.join("timings.csv"), timings)?;
    Ok(())
}
