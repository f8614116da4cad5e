use std::fmt;
use std::path::Path;

use super::config::ExperimentConfig;
use super::experiment::within_bound;
use super::output::{read_runs, CONFIG_FILE, RUNS_FILE};
use super::records::{aggregate, RunRecord};
use super::HarnessError;
use crate::search::Algorithm;

/// Outcome of one invariant over a whole runs.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub failures: Vec<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "PASS {}", self.name)
        } else {
            write!(f, "FAIL {} ({} rows", self.name, self.failures.len())?;
            if let Some(first) = self.failures.first() {
                write!(f, ", first: {first}")?;
            }
            write!(f, ")")
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Informational lines about expected trends; never fail the check.
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Checks a runs.csv, given directly or as the directory holding it. The
    /// bound and cap come from the config.json beside it, or the defaults
    /// when there is none.
    pub fn from_path(path: &Path) -> Result<VerifyReport, HarnessError> {
        let (runs_path, dir) = if path.is_dir() {
            (path.join(RUNS_FILE), path.to_path_buf())
        } else {
            (
                path.to_path_buf(),
                path.parent().unwrap_or(Path::new(".")).to_path_buf(),
            )
        };
        let runs = read_runs(&runs_path)?;
        let config_path = dir.join(CONFIG_FILE);
        let config = if config_path.exists() {
            let text =
                std::fs::read_to_string(&config_path).map_err(|source| HarnessError::Io {
                    path: config_path.clone(),
                    source,
                })?;
            serde_json::from_str(&text).map_err(|source| HarnessError::Json {
                path: config_path,
                source,
            })?
        } else {
            ExperimentConfig::default()
        };
        verify_runs(&runs, &config)
    }
}

fn check(
    name: &'static str,
    runs: &[RunRecord],
    bad: impl Fn(&RunRecord) -> Option<String>,
) -> Check {
    let failures = runs
        .iter()
        .filter_map(|r| {
            bad(r).map(|why| {
                format!(
                    "{} k={} B={:?} instance {}: {why}",
                    r.algorithm, r.k_fast, r.batch_size, r.instance_id
                )
            })
        })
        .collect();
    Check { name, failures }
}

/// Checks every row of a sweep against the invariants the planners must
/// uphold, and notes how the headline trends came out.
pub fn verify_runs(
    runs: &[RunRecord],
    config: &ExperimentConfig,
) -> Result<VerifyReport, HarnessError> {
    let max = config.max_expansions;
    let checks = vec![
        check("suboptimality bound", runs, |r| {
            match (r.cost, r.optimal_cost) {
                (Some(c), Some(opt)) if !within_bound(c, opt, config.w_so) => {
                    Some(format!("cost {c} > {} * {opt}", config.w_so))
                }
                _ => None,
            }
        }),
        check("inference time within wall time", runs, |r| {
            (r.inference_time > r.wall_time)
                .then(|| format!("{} > {}", r.inference_time, r.wall_time))
        }),
        check("expansion cap", runs, |r| {
            (r.expansions > max).then(|| format!("{} > {max}", r.expansions))
        }),
        check("generations cover expansions", runs, |r| {
            (r.generations < r.expansions).then(|| format!("{} < {}", r.generations, r.expansions))
        }),
        check("flushed states are generated states", runs, |r| {
            (r.flushed_states > r.generations)
                .then(|| format!("{} > {}", r.flushed_states, r.generations))
        }),
        check("unforced flushes are full batches", runs, |r| {
            match (r.min_unforced_flush, r.batch_size) {
                (Some(m), Some(b)) if m < b => Some(format!("flush of {m} < {b}")),
                _ => None,
            }
        }),
        check("nbba never forces a flush", runs, |r| {
            (r.algorithm == Algorithm::Nbba && r.forced_flushes > 0)
                .then(|| format!("{} forced", r.forced_flushes))
        }),
        check("solved runs report a cost", runs, |r| {
            (r.solved() != r.cost.is_some()).then(|| "status and cost disagree".into())
        }),
    ];

    let rows = aggregate(runs)?;
    let mut notes = Vec::new();
    for row in &rows {
        notes.push(format!(
            "{} k={} B={}: solved {}/{}, expansions {:.0} +- {:.0}, wall {:.3}s, inference share {:.2}",
            row.algorithm,
            row.k_fast,
            row.batch_size.map_or("-".into(), |b| b.to_string()),
            row.solved,
            row.runs,
            row.expansions_mean,
            row.expansions_std,
            row.wall_time_mean,
            row.inference_ratio_mean,
        ));
    }
    Ok(VerifyReport { checks, notes })
}
