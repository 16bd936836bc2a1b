use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::{Aggregate, ExperimentConfig, TrialRecord};
use crate::clique::SolverTag;
use crate::error::{Error, Result};

const HEADER: [&str; 7] = ["trial", "sweep_value", "scheme", "throughput_bps", "iterations", "solver", "wall_s"];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct Summary<'a> {
    version: &'static str,
    timestamp_unix: u64,
    config: &'a ExperimentConfig,
    cells: &'a [Aggregate],
}

/// Write `trials.csv` and `summary.json` into `dir`, creating it if needed.
/// Returns the two paths.
pub fn emit_results(
    records: &[TrialRecord],
    aggregates: &[Aggregate],
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let csv_path = dir.join("trials.csv");
    let csv_err = |source| Error::Csv {
        path: csv_path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record(HEADER).map_err(csv_err)?;
    for r in records {
        let wall = if config.record_wall_time { float(r.wall_s) } else { "0".to_string() };
        w.write_record([
            r.trial.to_string(),
            r.sweep_value.clone(),
            r.scheme.clone(),
            float(r.throughput_bps),
            r.iterations.to_string(),
            r.solver.as_str().to_string(),
            wall,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: csv_path.clone(),
        source,
    })?;

    let json_path = dir.join("summary.json");
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config,
        cells: aggregates,
    };
    let file = fs::File::create(&json_path).map_err(|source| Error::Io {
        path: json_path.clone(),
        source,
    })?;
    serde_json::to_writer_pretty(file, &summary).map_err(|source| Error::Json {
        path: json_path.clone(),
        source,
    })?;
    Ok((csv_path, json_path))
}

/// Parse a `trials.csv` written by [`emit_results`]. Sweep indices are
/// reconstructed from the order in which sweep values first appear.
pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let bad = |what: &str, line: usize| Error::Config(format!("{}: line {line}: bad {what}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::Config(format!("{}: unexpected header", path.display())));
    }
    let mut seen: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = i + 2;
        let sweep_value = row[1].to_string();
        let sweep_index = match seen.iter().position(|v| *v == sweep_value) {
            Some(k) => k,
            None => {
                seen.push(sweep_value.clone());
                seen.len() - 1
            }
        };
        out.push(TrialRecord {
            trial: row[0].parse().map_err(|_| bad("trial", line))?,
            sweep_index,
            sweep_value,
            scheme: row[2].to_string(),
            throughput_bps: row[3].parse().map_err(|_| bad("throughput", line))?,
            iterations: row[4].parse().map_err(|_| bad("iterations", line))?,
            solver: match &row[5] {
                "exact" => SolverTag::Exact,
                "greedy" => SolverTag::Greedy,
                _ => return Err(bad("solver", line)),
            },
            wall_s: row[6].parse().map_err(|_| bad("wall_s", line))?,
        });
    }
    Ok(out)
}
