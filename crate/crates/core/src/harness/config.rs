use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::search::Algorithm;
use crate::splitmix::splitmix64;

/// One experiment sweep: every (algorithm, k_fast, batch size) cell on every
/// instance. The focal baseline ignores the batch size and runs once per
/// k_fast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map_width: u32,
    pub map_height: u32,
    pub sand_density: f64,
    pub master_seed: u64,
    pub num_instances: u32,
    pub w_so: f64,
    pub w_h: f64,
    pub batch_sizes: Vec<usize>,
    pub k_fast_levels: Vec<f64>,
    pub k_nn: f64,
    pub algorithms: Vec<Algorithm>,
    pub max_expansions: u64,
    /// Minimum Manhattan distance between start and goal; `None` means half
    /// the larger map dimension.
    pub min_separation: Option<u64>,
    pub output_path: PathBuf,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Fixed busy-wait added to each batch call, in microseconds.
    pub nn_call_latency_us: u64,
    /// Compute the Dijkstra optimum per instance and enforce the bound.
    pub verify_bound: bool,
    /// Derived seeds, one entry per instance. Written out for reference;
    /// when given on input they must match what `master_seed` derives.
    pub instance_seeds: Vec<InstanceSeeds>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            map_width: 512,
            map_height: 512,
            sand_density: 0.05,
            master_seed: 2024,
            num_instances: 30,
            w_so: 2.5,
            w_h: 2.5,
            batch_sizes: vec![1, 5, 25, 125, 625],
            k_fast_levels: vec![0.005, 0.05, 0.5],
            k_nn: 0.01,
            algorithms: vec![Algorithm::Nbba, Algorithm::Blocking, Algorithm::Focal],
            max_expansions: 1_000_000,
            min_separation: None,
            output_path: PathBuf::from("results"),
            workers: 0,
            nn_call_latency_us: 0,
            verify_bound: true,
            instance_seeds: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.map_width == 0 || self.map_height == 0 {
            return bad(format!(
                "map size must be non-zero, got {}x{}",
                self.map_width, self.map_height
            ));
        }
        if !(0.0..=1.0).contains(&self.sand_density) {
            return bad(format!("sand_density {} outside [0, 1]", self.sand_density));
        }
        if self.num_instances == 0 {
            return bad("num_instances must be at least 1".into());
        }
        if !(self.w_so >= 1.0 && self.w_so.is_finite())
            || !(self.w_h >= 1.0 && self.w_h.is_finite())
        {
            return bad(format!(
                "weights must be finite and >= 1 (w_so={}, w_h={})",
                self.w_so, self.w_h
            ));
        }
        if self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            return bad("batch_sizes must be a non-empty list of positive sizes".into());
        }
        if self.k_fast_levels.is_empty() {
            return bad("k_fast_levels must not be empty".into());
        }
        if let Some(k) = self
            .k_fast_levels
            .iter()
            .chain(std::iter::once(&self.k_nn))
            .find(|k| !(0.0..=1.0).contains(*k))
        {
            return bad(format!("noise level {k} outside [0, 1]"));
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must not be empty".into());
        }
        if self.max_expansions == 0 {
            return bad("max_expansions must be at least 1".into());
        }
        if !self.instance_seeds.is_empty() && self.instance_seeds != self.derive_seeds() {
            return bad("instance_seeds do not match master_seed and num_instances; remove the list to rederive".into());
        }
        Ok(())
    }

    pub fn resolved_min_separation(&self) -> u64 {
        self.min_separation
            .unwrap_or(self.map_width.max(self.map_height) as u64 / 2)
    }

    /// Batch sizes that apply to `algorithm`; the focal baseline gets a
    /// single `None`.
    pub fn batch_cells(&self, algorithm: Algorithm) -> Vec<Option<usize>> {
        if algorithm.uses_batches() {
            self.batch_sizes.iter().copied().map(Some).collect()
        } else {
            vec![None]
        }
    }

    /// Number of runs the sweep performs.
    pub fn total_runs(&self) -> usize {
        let per_instance: usize = self
            .algorithms
            .iter()
            .map(|&a| self.batch_cells(a).len() * self.k_fast_levels.len())
            .sum();
        per_instance * self.num_instances as usize
    }

    fn derive_seeds(&self) -> Vec<InstanceSeeds> {
        (0..self.num_instances)
            .map(|id| InstanceSeeds::derive(self.master_seed, id))
            .collect()
    }

    /// The config with every default made explicit and every seed listed,
    /// as written to config.json.
    pub fn resolved(&self) -> ExperimentConfig {
        ExperimentConfig {
            min_separation: Some(self.resolved_min_separation()),
            instance_seeds: self.derive_seeds(),
            ..self.clone()
        }
    }
}

/// Seeds of one instance, all derived from the master seed.
///
/// * map: `splitmix64(master, 2 * id)`
/// * instance: `splitmix64(master, 2 * id + 1)`
/// * fast-heuristic noise: `splitmix64(instance, 0)`
/// * batch-heuristic noise: `splitmix64(instance, 1)`
/// * synthetic network input: `splitmix64(instance, 2)`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSeeds {
    pub map: u64,
    pub instance: u64,
    pub fast_noise: u64,
    pub nn_noise: u64,
    pub nn_input: u64,
}

impl InstanceSeeds {
    pub fn derive(master_seed: u64, instance_id: u32) -> Self {
        let id = instance_id as u64;
        let instance = splitmix64(master_seed, 2 * id + 1);
        InstanceSeeds {
            map: splitmix64(master_seed, 2 * id),
            instance,
            fast_noise: splitmix64(instance, 0),
            nn_noise: splitmix64(instance, 1),
            nn_input: splitmix64(instance, 2),
        }
    }
}

/// Weights of the timing network: `splitmix64(master, u64::MAX)`.
pub fn mlp_seed(master_seed: u64) -> u64 {
    splitmix64(master_seed, u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!((c.w_so, c.w_h, c.k_nn), (2.5, 2.5, 0.01));
        assert_eq!(c.k_fast_levels, vec![0.005, 0.05, 0.5]);
        assert_eq!(c.batch_sizes, vec![1, 5, 25, 125, 625]);
        assert_eq!(c.num_instances, 30);
        assert_eq!(c.max_expansions, 1_000_000);
        assert_eq!(c.sand_density, 0.05);
        assert_eq!(c.resolved_min_separation(), 256);
        c.validate().unwrap();
    }

    #[test]
    fn default_sweep_has_990_runs() {
        assert_eq!(
            ExperimentConfig::default().total_runs(),
            30 * (2 * 3 * 5 + 3)
        );
    }

    #[test]
    fn single_cell_sweep() {
        let c = ExperimentConfig {
            num_instances: 1,
            algorithms: vec![Algorithm::Nbba],
            batch_sizes: vec![5],
            k_fast_levels: vec![0.05],
            ..Default::default()
        };
        assert_eq!(c.total_runs(), 1);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = ExperimentConfig::default();
        for c in [
            ExperimentConfig {
                batch_sizes: vec![],
                ..base.clone()
            },
            ExperimentConfig {
                batch_sizes: vec![0],
                ..base.clone()
            },
            ExperimentConfig {
                w_so: 0.5,
                ..base.clone()
            },
            ExperimentConfig {
                k_fast_levels: vec![1.5],
                ..base.clone()
            },
            ExperimentConfig {
                algorithms: vec![],
                ..base.clone()
            },
            ExperimentConfig {
                num_instances: 0,
                ..base.clone()
            },
            ExperimentConfig {
                map_width: 0,
                ..base.clone()
            },
        ] {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn json_round_trip_and_partial_files() {
        let c = ExperimentConfig::default().resolved();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let partial: ExperimentConfig =
            serde_json::from_str(r#"{"map_width": 64, "algorithms": ["focal"]}"#).unwrap();
        assert_eq!(partial.map_width, 64);
        assert_eq!(partial.algorithms, vec![Algorithm::Focal]);
        assert_eq!(partial.batch_sizes, ExperimentConfig::default().batch_sizes);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn resolved_seeds_must_match_master() {
        let c = ExperimentConfig {
            num_instances: 3,
            ..Default::default()
        }
        .resolved();
        assert_eq!(c.instance_seeds.len(), 3);
        assert_eq!(c.instance_seeds[2], InstanceSeeds::derive(2024, 2));
        c.validate().unwrap();
        assert!(ExperimentConfig {
            master_seed: 7,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            num_instances: 4,
            ..c
        }
        .validate()
        .is_err());
    }

    #[test]
    fn seeds_are_distinct_per_instance() {
        let a = InstanceSeeds::derive(1, 0);
        let b = InstanceSeeds::derive(1, 1);
        assert_ne!(a.map, b.map);
        assert_ne!(a.map, a.instance);
        assert_ne!(a.fast_noise, a.nn_noise);
        assert_eq!(a, InstanceSeeds::derive(1, 0));
    }
}
