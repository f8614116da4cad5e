use std::hint::black_box;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::mlp::{MlpScratch, MlpTimingModel, MLP_INPUT_WIDTH};
use super::{BatchEvaluator, BatchOutput, EvaluatorError, HeuristicSource};
use crate::grid::GridState;
use crate::splitmix::{splitmix64, unit_f64};

/// Stand-in for a batch neural-network heuristic.
///
/// Each call pushes a synthetic `batch x 242` input through the timing
/// network and reports the forward-pass wall time, then returns values from
/// a noisy Manhattan source (normally `k = 0.01` with its own seed). The
/// network output itself is thrown away.
#[derive(Debug)]
pub struct SimulatedNnEvaluator {
    values: HeuristicSource,
    model: Arc<MlpTimingModel>,
    input_seed: u64,
    input: Vec<f32>,
    scratch: MlpScratch,
    call_latency: Duration,
    calls: u64,
}

impl SimulatedNnEvaluator {
    pub fn new(values: HeuristicSource, model: Arc<MlpTimingModel>, input_seed: u64) -> Self {
        SimulatedNnEvaluator {
            values,
            model,
            input_seed,
            input: Vec::new(),
            scratch: MlpScratch::default(),
            call_latency: Duration::ZERO,
            calls: 0,
        }
    }

    /// Adds a fixed busy-wait to every call, inside the timed region, to
    /// emulate accelerator dispatch overhead.
    pub fn with_call_latency(mut self, latency: Duration) -> Self {
        self.call_latency = latency;
        self
    }

    pub fn value_source(&self) -> &HeuristicSource {
        &self.values
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn model(&self) -> &MlpTimingModel {
        &self.model
    }

    fn ensure_rows(&mut self, rows: usize) {
        let have = self.input.len();
        let need = rows * MLP_INPUT_WIDTH;
        if need > have {
            let seed = self.input_seed;
            self.input
                .extend((have..need).map(|i| unit_f64(splitmix64(seed, i as u64)) as f32));
        }
    }

    /// Runs only the timed forward pass on `batch` rows.
    pub fn time_forward(&mut self, batch: usize) -> Duration {
        self.ensure_rows(batch);
        let started = Instant::now();
        let out = self.model.forward(&self.input, batch, &mut self.scratch);
        black_box(out.iter().sum::<f32>());
        if !self.call_latency.is_zero() {
            while started.elapsed() < self.call_latency {
                std::hint::spin_loop();
            }
        }
        started.elapsed()
    }
}

impl BatchEvaluator<GridState> for SimulatedNnEvaluator {
    fn evaluate(&mut self, states: &[GridState]) -> Result<BatchOutput, EvaluatorError> {
        if states.is_empty() {
            return Ok(BatchOutput {
                values: Vec::new(),
                inference_time: Duration::ZERO,
            });
        }
        let inference_time = self.time_forward(states.len());
        self.calls += 1;
        let values = states.iter().map(|s| self.values.value(s)).collect();
        Ok(BatchOutput {
            values,
            inference_time,
        })
    }
}
