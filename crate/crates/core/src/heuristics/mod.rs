//! Heuristic contracts and the grid heuristics.
//!
//! Three pieces meet here:
//!
//! * [`FastHeuristic`]: the cheap, admissible estimate that orders OPEN.
//! * [`BatchEvaluator`]: the expensive evaluator that is only ever called on
//!   whole batches of states (a neural network in practice).
//! * [`HeuristicCache`]: an overlay holding batch-evaluated values. Reads go to
//!   the overlay first and fall back to the fast heuristic; this is what the
//!   focal ordering uses.

mod cache;
mod evaluator;
mod mlp;
mod source;

use std::time::Duration;

use thiserror::Error;

pub use cache::HeuristicCache;
pub use evaluator::SimulatedNnEvaluator;
pub use mlp::{MlpTimingModel, MLP_INPUT_WIDTH, MLP_LAYER_DIMS};
pub use source::{manhattan, noisy_value, HeuristicKind, HeuristicSource};

/// Cheap per-state heuristic. Implementations must be pure: the same state
/// always yields the same value.
pub trait FastHeuristic<S> {
    fn value(&self, state: &S) -> f64;
}

impl<S, H: FastHeuristic<S> + ?Sized> FastHeuristic<S> for &H {
    fn value(&self, state: &S) -> f64 {
        (**self).value(state)
    }
}

/// Values produced by one batch call, order-aligned with the submitted states.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub values: Vec<f64>,
    pub inference_time: Duration,
}

#[derive(Debug, Error)]
pub enum EvaluatorError {
    #[error("evaluator returned {got} values for a batch of {expected} states")]
    LengthMismatch { expected: usize, got: usize },
    #[error("evaluator returned an invalid value {value} for batch item {index}")]
    InvalidValue { index: usize, value: f64 },
    #[error("evaluator backend failed: {0}")]
    Backend(String),
}

/// A heuristic that is evaluated on batches of states.
pub trait BatchEvaluator<S> {
    fn evaluate(&mut self, states: &[S]) -> Result<BatchOutput, EvaluatorError>;
}

impl<S, E: BatchEvaluator<S> + ?Sized> BatchEvaluator<S> for &mut E {
    fn evaluate(&mut self, states: &[S]) -> Result<BatchOutput, EvaluatorError> {
        (**self).evaluate(states)
    }
}
