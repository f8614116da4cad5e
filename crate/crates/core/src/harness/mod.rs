//! Experiment sweeps: instance suites, per-run records, aggregation, CSV
//! output and post-hoc checks of a results directory.

mod config;
mod experiment;
mod oracle;
mod output;
mod records;
mod verify;

use std::path::PathBuf;

pub use config::{mlp_seed, ExperimentConfig, InstanceSeeds};
pub use experiment::{
    prepare_instance, run_experiment, run_experiment_with, run_single, run_specs, within_bound,
    PreparedInstance, RunSpec, ViolationReport,
};
pub use oracle::{cost_to_go, cost_to_go_at, dijkstra_optimal, MAX_ORACLE_CELLS, UNREACHABLE};
pub use output::{
    read_aggregates, read_runs, write_aggregates, write_results, write_runs, write_violation,
    AGGREGATES_FILE, CONFIG_FILE, RUNS_FILE,
};
pub use records::{
    aggregate, mean_std, AggregateRow, GroupKey, RunRecord, AGGREGATE_COLUMNS, RUN_COLUMNS,
    TIMING_COLUMNS,
};
pub use verify::{verify_runs, Check, VerifyReport};

use crate::grid::GridError;
use crate::search::{Cost, SearchError};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("map has {cells} cells, more than the oracle limit of {limit}")]
    OracleTooLarge { cells: u64, limit: u64 },
    #[error("goal is unreachable from the start")]
    Unsolvable,
    #[error("cannot aggregate an empty group")]
    EmptyGroup,
    #[error("instance {instance_id}: reported cost {reported} but the path walks to {walked:?}")]
    PathMismatch {
        instance_id: u32,
        reported: Cost,
        walked: Option<Cost>,
    },
    #[error(
        "suboptimality bound violated: {} on instance {} (k_fast={}, batch={:?}) cost {:?} > {} * {:?}",
        .0.record.algorithm, .0.record.instance_id, .0.record.k_fast, .0.record.batch_size,
        .0.record.cost, .0.w_so, .0.record.optimal_cost
    )]
    BoundViolation(Box<ViolationReport>),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
