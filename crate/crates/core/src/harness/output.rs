use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiment::ViolationReport;
use super::records::{AggregateRow, RunRecord, AGGREGATE_COLUMNS, RUN_COLUMNS};
use super::HarnessError;

pub const RUNS_FILE: &str = "runs.csv";
pub const AGGREGATES_FILE: &str = "aggregates.csv";
pub const CONFIG_FILE: &str = "config.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the header explicitly so an empty table still has one.
fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(csv_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

pub fn write_runs(path: &Path, records: &[RunRecord]) -> Result<(), HarnessError> {
    write_csv(path, &RUN_COLUMNS, records)
}

pub fn write_aggregates(path: &Path, rows: &[AggregateRow]) -> Result<(), HarnessError> {
    write_csv(path, &AGGREGATE_COLUMNS, rows)
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    read_csv(path)
}

pub fn read_aggregates(path: &Path) -> Result<Vec<AggregateRow>, HarnessError> {
    read_csv(path)
}

/// Writes runs.csv, aggregates.csv and the resolved config.json into `dir`,
/// creating it if needed.
pub fn write_results(
    dir: &Path,
    config: &ExperimentConfig,
    records: &[RunRecord],
    aggregates: &[AggregateRow],
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_runs(&dir.join(RUNS_FILE), records)?;
    write_aggregates(&dir.join(AGGREGATES_FILE), aggregates)?;
    write_json(&dir.join(CONFIG_FILE), &config.resolved())
}

/// Dumps a bound violation as `violation.json` plus the offending map in
/// binary form, and returns both paths.
pub fn write_violation(
    dir: &Path,
    report: &ViolationReport,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let json = dir.join("violation.json");
    let map = dir.join("violation_map.bin");
    write_json(&json, report)?;
    report.map.save(&map).map_err(|e| match e {
        crate::grid::GridError::Io(source) => HarnessError::Io {
            path: map.clone(),
            source,
        },
        other => other.into(),
    })?;
    Ok((json, map))
}
