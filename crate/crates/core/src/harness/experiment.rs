use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{mlp_seed, ExperimentConfig, InstanceSeeds};
use super::oracle::dijkstra_optimal;
use super::records::RunRecord;
use super::HarnessError;
use crate::grid::{generate_instance, generate_map, Cell, GridState, ProblemInstance, SandMap};
use crate::heuristics::{BatchEvaluator, HeuristicSource, MlpTimingModel, SimulatedNnEvaluator};
use crate::search::{self, Algorithm, Cost, SearchDomain, SearchOutcome, SearchParams};

/// An instance of the suite together with its exact optimum.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub id: u32,
    pub seeds: InstanceSeeds,
    pub instance: ProblemInstance,
    pub optimal_cost: Option<Cost>,
}

/// One cell of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub k_fast: f64,
    pub batch_size: Option<usize>,
}

/// Everything needed to reproduce a run that broke the suboptimality bound.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationReport {
    pub record: RunRecord,
    pub seeds: InstanceSeeds,
    pub start: GridState,
    pub goal: Cell,
    pub w_so: f64,
    #[serde(skip)]
    pub map: Arc<SandMap>,
}

pub fn prepare_instance(
    config: &ExperimentConfig,
    id: u32,
) -> Result<PreparedInstance, HarnessError> {
    let seeds = InstanceSeeds::derive(config.master_seed, id);
    let map = Arc::new(generate_map(
        config.map_width,
        config.map_height,
        config.sand_density,
        seeds.map,
    )?);
    let instance = generate_instance(map, seeds.instance, config.resolved_min_separation())?;
    let optimal_cost = if config.verify_bound {
        Some(dijkstra_optimal(&instance)?)
    } else {
        None
    };
    Ok(PreparedInstance {
        id,
        seeds,
        instance,
        optimal_cost,
    })
}

/// The sweep grid in configuration order.
pub fn run_specs(config: &ExperimentConfig) -> Vec<RunSpec> {
    let mut specs = Vec::new();
    for &algorithm in &config.algorithms {
        for &k_fast in &config.k_fast_levels {
            for batch_size in config.batch_cells(algorithm) {
                specs.push(RunSpec {
                    algorithm,
                    k_fast,
                    batch_size,
                });
            }
        }
    }
    specs
}

/// Runs one cell on one instance and checks the result against the bound.
pub fn run_single(
    config: &ExperimentConfig,
    prepared: &PreparedInstance,
    model: &Arc<MlpTimingModel>,
    job: RunSpec,
) -> Result<(RunRecord, SearchOutcome<GridState>), HarnessError> {
    let instance = &prepared.instance;
    let fast = HeuristicSource::noisy(instance.goal, job.k_fast, prepared.seeds.fast_noise);
    let params = SearchParams::new(
        config.w_so,
        config.w_h,
        job.batch_size.unwrap_or(1),
        config.max_expansions,
    )?;
    let mut evaluator = SimulatedNnEvaluator::new(
        HeuristicSource::noisy(instance.goal, config.k_nn, prepared.seeds.nn_noise),
        model.clone(),
        prepared.seeds.nn_input,
    )
    .with_call_latency(Duration::from_micros(config.nn_call_latency_us));
    let evaluator: Option<&mut dyn BatchEvaluator<GridState>> = if job.algorithm.uses_batches() {
        Some(&mut evaluator)
    } else {
        None
    };
    let outcome = search::run(job.algorithm, instance, fast, evaluator, params)?;

    if let (Some(path), Some(cost)) = (&outcome.path, outcome.cost) {
        let walked: Option<Cost> = path
            .windows(2)
            .map(|w| instance.step_cost(&w[0], &w[1]))
            .sum();
        if walked != Some(cost) {
            return Err(HarnessError::PathMismatch {
                instance_id: prepared.id,
                reported: cost,
                walked,
            });
        }
    }

    let m = &outcome.metrics;
    let suboptimality_ratio = match (outcome.cost, prepared.optimal_cost) {
        (Some(c), Some(opt)) if opt > 0 => Some(c as f64 / opt as f64),
        _ => None,
    };
    let record = RunRecord {
        algorithm: job.algorithm,
        k_fast: job.k_fast,
        batch_size: job.batch_size,
        instance_id: prepared.id,
        expansions: m.expansions,
        lazy_reinsertions: m.lazy_reinsertions,
        generations: m.generations,
        flushes: m.flushes,
        flushed_states: m.flushed_states,
        inference_time: m.inference_time.as_secs_f64(),
        wall_time: m.wall_time.as_secs_f64(),
        status: outcome.status,
        cost: outcome.cost,
        optimal_cost: prepared.optimal_cost,
        suboptimality_ratio,
        forced_flushes: m.forced_flushes,
        min_unforced_flush: m.min_unforced_flush,
        waitlist_residue: m.waitlist_residue,
    };
    if let (Some(c), Some(opt)) = (record.cost, record.optimal_cost) {
        if !within_bound(c, opt, config.w_so) {
            return Err(HarnessError::BoundViolation(Box::new(ViolationReport {
                record,
                seeds: prepared.seeds,
                start: instance.start,
                goal: instance.goal,
                w_so: config.w_so,
                map: instance.map.clone(),
            })));
        }
    }
    Ok((record, outcome))
}

/// `cost <= w_so * optimal`, compared exactly in floating point.
pub fn within_bound(cost: Cost, optimal: Cost, w_so: f64) -> bool {
    cost as f64 <= w_so * optimal as f64
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>, HarnessError> {
    run_experiment_with(config, &|_, _, _| {})
}

/// Like [`run_experiment`], calling `progress(record, done, total)` after
/// every run. Records come back sorted by (algorithm, k_fast, batch size,
/// instance) whatever the worker count.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    progress: &(dyn Fn(&RunRecord, usize, usize) + Sync),
) -> Result<Vec<RunRecord>, HarnessError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let model = Arc::new(MlpTimingModel::new(mlp_seed(config.master_seed)));
    let specs = run_specs(config);
    let total = config.total_runs();
    let done = AtomicUsize::new(0);

    pool.install(|| {
        let instances: Vec<PreparedInstance> = (0..config.num_instances)
            .into_par_iter()
            .map(|id| prepare_instance(config, id))
            .collect::<Result<_, _>>()?;
        let jobs: Vec<(&PreparedInstance, RunSpec)> = instances
            .iter()
            .flat_map(|p| specs.iter().map(move |s| (p, *s)))
            .collect();
        let mut records: Vec<RunRecord> = jobs
            .par_iter()
            .map(|(prepared, job)| {
                let (record, _) = run_single(config, prepared, &model, *job)?;
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                progress(&record, n, total);
                Ok(record)
            })
            .collect::<Result<_, HarnessError>>()?;
        records.sort_by(|a, b| {
            a.group_key()
                .cmp(&b.group_key())
                .then(a.instance_id.cmp(&b.instance_id))
        });
        Ok(records)
    })
}
