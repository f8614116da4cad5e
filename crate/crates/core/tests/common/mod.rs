#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use nbba::grid::{generate_instance, generate_map, ProblemInstance};
use nbba::heuristics::{
    BatchEvaluator, BatchOutput, EvaluatorError, FastHeuristic, HeuristicSource,
};
use nbba::search::{Cost, SearchDomain};
use nbba::splitmix::splitmix64;

/// A random instance on a `size`x`size` map with the default density.
pub fn grid_instance(size: u32, density: f64, seed: u64) -> ProblemInstance {
    let map = Arc::new(generate_map(size, size, density, splitmix64(seed, 0)).unwrap());
    generate_instance(map, splitmix64(seed, 1), size as u64 / 2).unwrap()
}

/// Batch evaluator that returns a fixed heuristic's values and records
/// every call.
pub struct Recording<H> {
    pub values: H,
    pub calls: Vec<usize>,
}

impl<H> Recording<H> {
    pub fn new(values: H) -> Self {
        Recording {
            values,
            calls: Vec::new(),
        }
    }
}

impl<S, H: FastHeuristic<S>> BatchEvaluator<S> for Recording<H> {
    fn evaluate(&mut self, states: &[S]) -> Result<BatchOutput, EvaluatorError> {
        self.calls.push(states.len());
        Ok(BatchOutput {
            values: states.iter().map(|s| self.values.value(s)).collect(),
            inference_time: Duration::ZERO,
        })
    }
}

/// Any closure over states is a fast heuristic.
pub struct FnHeuristic<F>(pub F);

impl<S, F: Fn(&S) -> f64> FastHeuristic<S> for FnHeuristic<F> {
    fn value(&self, s: &S) -> f64 {
        (self.0)(s)
    }
}

/// Explicit directed graph over `u32` states starting at 0.
pub struct Graph {
    pub edges: Vec<Vec<(u32, Cost)>>,
    pub goal: Option<u32>,
}

impl Graph {
    pub fn new(n: usize, goal: Option<u32>) -> Self {
        Graph {
            edges: vec![Vec::new(); n],
            goal,
        }
    }

    pub fn edge(mut self, from: u32, to: u32, cost: Cost) -> Self {
        self.edges[from as usize].push((to, cost));
        self
    }
}

impl SearchDomain for Graph {
    type State = u32;

    fn start(&self) -> u32 {
        0
    }

    fn is_goal(&self, s: &u32) -> bool {
        Some(*s) == self.goal
    }

    fn expand(&self, s: &u32, out: &mut Vec<(u32, Cost)>) {
        out.extend_from_slice(&self.edges[*s as usize]);
    }

    fn step_cost(&self, from: &u32, to: &u32) -> Option<Cost> {
        self.edges[*from as usize]
            .iter()
            .find(|e| e.0 == *to)
            .map(|e| e.1)
    }
}

pub fn fast_source(instance: &ProblemInstance, k: f64) -> HeuristicSource {
    HeuristicSource::noisy(instance.goal, k, splitmix64(instance.instance_seed, 0))
}

pub fn nn_source(instance: &ProblemInstance) -> HeuristicSource {
    HeuristicSource::noisy(instance.goal, 0.01, splitmix64(instance.instance_seed, 1))
}
