//! Artifact writers. Everything written here is a function of the config alone.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::{Row, SubRun};
use crate::Outcome;

pub const AGGREGATE: &str = "aggregate.csv";
pub const SUMMARY: &str = "summary.json";
pub const RUNS: &str = "runs";

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| CliError::io(path, e.into()))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn write_aggregate<W: Write>(w: W, rows: &[Row]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn run_stem(run: &SubRun) -> String {
    format!("{:02}_sigma_{}", run.index, run.sigma)
}

pub fn write_all(
    cfg: &ExperimentConfig,
    runs: &[SubRun],
    outcome: &Outcome,
    strict: bool,
) -> Result<(), CliError> {
    let dir = &outcome.out_dir;
    let runs_dir = dir.join(RUNS);
    fs::create_dir_all(&runs_dir).map_err(|e| CliError::io(&runs_dir, e))?;
    for r in runs {
        let stem = run_stem(r);
        let doc = json!({
            "kind": cfg.kind.name(),
            "index": r.index,
            "sigma": r.sigma,
            "rows": r.rows,
            "warnings": r.warnings,
            "report": r.report,
        });
        write_json(&runs_dir.join(format!("{stem}.json")), &doc)?;
        for (label, u) in &r.solutions {
            let path = runs_dir.join(format!("{stem}_solution_{label}.csv"));
            let mut w = create(&path)?;
            u.write_csv(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&path, e))?;
        }
    }
    let path = dir.join(AGGREGATE);
    let w = create(&path)?;
    write_aggregate(w, &outcome.rows).map_err(|e| CliError::io(&path, e.into()))?;
    let summary = json!({
        "kind": cfg.kind.name(),
        "sigmas": cfg.problem.sigmas,
        "checks": outcome.checks,
        "warnings": outcome.warnings,
        "strict": strict,
        "pass": outcome.exit_code == crate::EXIT_PASS,
        "exit_code": outcome.exit_code,
        "config": cfg,
    });
    write_json(&dir.join(SUMMARY), &summary)
}
