use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::search::{Algorithm, Cost, SearchStatus};

/// One row of runs.csv. Times are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub k_fast: f64,
    /// Empty for the focal baseline.
    pub batch_size: Option<usize>,
    pub instance_id: u32,
    pub expansions: u64,
    pub lazy_reinsertions: u64,
    pub generations: u64,
    pub flushes: u64,
    pub flushed_states: u64,
    pub inference_time: f64,
    pub wall_time: f64,
    #[serde(with = "status_text")]
    pub status: SearchStatus,
    pub cost: Option<Cost>,
    pub optimal_cost: Option<Cost>,
    pub suboptimality_ratio: Option<f64>,
    pub forced_flushes: u64,
    pub min_unforced_flush: Option<usize>,
    pub waitlist_residue: usize,
}

mod status_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::search::SearchStatus;

    pub fn serialize<S: Serializer>(s: &SearchStatus, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(s.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<SearchStatus, D::Error> {
        let text = String::deserialize(de)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// runs.csv header, in field order.
pub const RUN_COLUMNS: [&str; 18] = [
    "algorithm",
    "k_fast",
    "batch_size",
    "instance_id",
    "expansions",
    "lazy_reinsertions",
    "generations",
    "flushes",
    "flushed_states",
    "inference_time",
    "wall_time",
    "status",
    "cost",
    "optimal_cost",
    "suboptimality_ratio",
    "forced_flushes",
    "min_unforced_flush",
    "waitlist_residue",
];

/// aggregates.csv header, in field order.
pub const AGGREGATE_COLUMNS: [&str; 14] = [
    "algorithm",
    "k_fast",
    "batch_size",
    "runs",
    "solved",
    "solve_rate",
    "expansions_mean",
    "expansions_std",
    "wall_time_mean",
    "wall_time_std",
    "inference_ratio_mean",
    "inference_ratio_std",
    "cost_mean",
    "suboptimality_mean",
];

/// runs.csv columns holding wall-clock measurements.
pub const TIMING_COLUMNS: [&str; 2] = ["inference_time", "wall_time"];

impl RunRecord {
    pub fn solved(&self) -> bool {
        self.status == SearchStatus::SolutionFound
    }

    /// `inference_time / wall_time`, 0 when nothing was measured.
    pub fn inference_ratio(&self) -> f64 {
        if self.wall_time > 0.0 {
            self.inference_time / self.wall_time
        } else {
            0.0
        }
    }

    pub fn group_key(&self) -> GroupKey {
        GroupKey {
            algorithm: self.algorithm,
            k_fast: self.k_fast,
            batch_size: self.batch_size,
        }
    }
}

/// (algorithm, k_fast, batch size), ordered as the sweep lists them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupKey {
    pub algorithm: Algorithm,
    pub k_fast: f64,
    pub batch_size: Option<usize>,
}

impl Eq for GroupKey {}

impl PartialOrd for GroupKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.algorithm
            .cmp(&other.algorithm)
            .then(self.k_fast.total_cmp(&other.k_fast))
            .then(self.batch_size.cmp(&other.batch_size))
    }
}

/// One row of aggregates.csv. Standard deviations are population (divide
/// by n). Cost statistics cover solved runs only; expansion and time
/// statistics cover every run, capped ones included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: Algorithm,
    pub k_fast: f64,
    pub batch_size: Option<usize>,
    pub runs: usize,
    pub solved: usize,
    pub solve_rate: f64,
    pub expansions_mean: f64,
    pub expansions_std: f64,
    pub wall_time_mean: f64,
    pub wall_time_std: f64,
    pub inference_ratio_mean: f64,
    pub inference_ratio_std: f64,
    pub cost_mean: Option<f64>,
    pub suboptimality_mean: Option<f64>,
}

impl AggregateRow {
    pub fn group_key(&self) -> GroupKey {
        GroupKey {
            algorithm: self.algorithm,
            k_fast: self.k_fast,
            batch_size: self.batch_size,
        }
    }
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn summarize(key: GroupKey, group: &[&RunRecord]) -> Result<AggregateRow, HarnessError> {
    if group.is_empty() {
        return Err(HarnessError::EmptyGroup);
    }
    let col = |f: &dyn Fn(&RunRecord) -> f64| group.iter().map(|r| f(r)).collect::<Vec<_>>();
    let (expansions_mean, expansions_std) = mean_std(&col(&|r| r.expansions as f64));
    let (wall_time_mean, wall_time_std) = mean_std(&col(&|r| r.wall_time));
    let (inference_ratio_mean, inference_ratio_std) = mean_std(&col(&|r| r.inference_ratio()));
    let solved: Vec<&&RunRecord> = group.iter().filter(|r| r.solved()).collect();
    let costs: Vec<f64> = solved
        .iter()
        .filter_map(|r| r.cost)
        .map(|c| c as f64)
        .collect();
    let ratios: Vec<f64> = solved
        .iter()
        .filter_map(|r| r.suboptimality_ratio)
        .collect();
    Ok(AggregateRow {
        algorithm: key.algorithm,
        k_fast: key.k_fast,
        batch_size: key.batch_size,
        runs: group.len(),
        solved: solved.len(),
        solve_rate: solved.len() as f64 / group.len() as f64,
        expansions_mean,
        expansions_std,
        wall_time_mean,
        wall_time_std,
        inference_ratio_mean,
        inference_ratio_std,
        cost_mean: (!costs.is_empty()).then(|| mean_std(&costs).0),
        suboptimality_mean: (!ratios.is_empty()).then(|| mean_std(&ratios).0),
    })
}

/// Groups records by (algorithm, k_fast, batch size) and summarizes each
/// group. Within a group, records are taken in instance order.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AggregateRow>, HarnessError> {
    let mut groups: BTreeMap<GroupKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.group_key()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(key, mut group)| {
            group.sort_by_key(|r| r.instance_id);
            summarize(key, &group)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(expansions: u64) -> RunRecord {
        RunRecord {
            algorithm: Algorithm::Nbba,
            k_fast: 0.05,
            batch_size: Some(5),
            instance_id: 0,
            expansions,
            lazy_reinsertions: 0,
            generations: expansions * 3,
            flushes: 0,
            flushed_states: 0,
            inference_time: 0.25,
            wall_time: 1.0,
            status: SearchStatus::SolutionFound,
            cost: Some(10),
            optimal_cost: Some(8),
            suboptimality_ratio: Some(1.25),
            forced_flushes: 0,
            min_unforced_flush: None,
            waitlist_residue: 0,
        }
    }

    #[test]
    fn single_record_group() {
        let rows = aggregate(&[record(42)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].expansions_mean, 42.0);
        assert_eq!(rows[0].expansions_std, 0.0);
        assert_eq!(rows[0].inference_ratio_mean, 0.25);
        assert_eq!(rows[0].solve_rate, 1.0);
    }

    #[test]
    fn identical_records_have_zero_spread() {
        let recs: Vec<_> = (0..5)
            .map(|i| RunRecord {
                instance_id: i,
                ..record(7)
            })
            .collect();
        let rows = aggregate(&recs).unwrap();
        assert_eq!(rows[0].expansions_std, 0.0);
        assert_eq!(rows[0].wall_time_std, 0.0);
    }

    #[test]
    fn population_std_of_100_200_300() {
        let recs: Vec<_> = [100, 200, 300]
            .iter()
            .enumerate()
            .map(|(i, &e)| RunRecord {
                instance_id: i as u32,
                ..record(e)
            })
            .collect();
        let row = &aggregate(&recs).unwrap()[0];
        assert_eq!(row.expansions_mean, 200.0);
        // sqrt(((100)^2 + 0 + (100)^2) / 3)
        assert!((row.expansions_std - 81.649_658_092_772_6).abs() < 1e-9);
    }

    #[test]
    fn unsolved_runs_count_for_expansions_not_cost() {
        let capped = RunRecord {
            instance_id: 1,
            status: SearchStatus::ExpansionLimitReached,
            cost: None,
            suboptimality_ratio: None,
            expansions: 1000,
            ..record(0)
        };
        let recs = vec![record(100), capped];
        let row = &aggregate(&recs).unwrap()[0];
        assert_eq!(row.expansions_mean, 550.0);
        assert_eq!(row.solve_rate, 0.5);
        assert_eq!(row.cost_mean, Some(10.0));
    }

    #[test]
    fn groups_are_separated_and_ordered() {
        let recs = vec![
            RunRecord {
                algorithm: Algorithm::Focal,
                batch_size: None,
                ..record(1)
            },
            RunRecord {
                batch_size: Some(625),
                ..record(2)
            },
            record(3),
            RunRecord {
                k_fast: 0.005,
                ..record(4)
            },
        ];
        let rows = aggregate(&recs).unwrap();
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.algorithm, r.k_fast, r.batch_size))
            .collect();
        assert_eq!(
            keys,
            vec![
                (Algorithm::Nbba, 0.005, Some(5)),
                (Algorithm::Nbba, 0.05, Some(5)),
                (Algorithm::Nbba, 0.05, Some(625)),
                (Algorithm::Focal, 0.05, None),
            ]
        );
    }

    #[test]
    fn empty_input_gives_no_rows() {
        assert!(aggregate(&[]).unwrap().is_empty());
        assert!(matches!(
            summarize(record(1).group_key(), &[]),
            Err(HarnessError::EmptyGroup)
        ));
    }
}
