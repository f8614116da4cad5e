use std::sync::atomic::{AtomicU64, Ordering};

use crate::splitmix::{splitmix64, unit_f64};

/// Width of the synthetic input rows.
pub const MLP_INPUT_WIDTH: usize = 242;

/// Input width followed by the widths of the three dense layers.
pub const MLP_LAYER_DIMS: [usize; 4] = [MLP_INPUT_WIDTH, 256, 256, 1];

/// A small dense network whose forward pass stands in for real inference
/// cost. Its numeric output is discarded by the evaluator.
///
/// Weights are `f32` in `[-1, 1]` drawn from splitmix64 keyed by the seed;
/// layers are `242 -> 256 -> 256 -> 1` with ReLU between layers and no bias.
#[derive(Debug)]
pub struct MlpTimingModel {
    seed: u64,
    // Row-major (in x out) per layer.
    weights: Vec<Vec<f32>>,
    macs: AtomicU64,
}

/// Activation buffers reused across forward passes.
#[derive(Debug, Default, Clone)]
pub struct MlpScratch {
    layers: Vec<Vec<f32>>,
}

impl MlpTimingModel {
    pub fn new(seed: u64) -> Self {
        let mut offset = 0u64;
        let weights = MLP_LAYER_DIMS
            .windows(2)
            .map(|d| {
                let n = d[0] * d[1];
                let w = (0..n as u64)
                    .map(|i| (2.0 * unit_f64(splitmix64(seed, offset + i)) - 1.0) as f32)
                    .collect();
                offset += n as u64;
                w
            })
            .collect();
        MlpTimingModel {
            seed,
            weights,
            macs: AtomicU64::new(0),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layer_weights(&self, layer: usize) -> &[f32] {
        &self.weights[layer]
    }

    /// Multiply-adds per input row: `242*256 + 256*256 + 256*1`.
    pub const fn macs_per_row() -> u64 {
        (MLP_LAYER_DIMS[0] * MLP_LAYER_DIMS[1]
            + MLP_LAYER_DIMS[1] * MLP_LAYER_DIMS[2]
            + MLP_LAYER_DIMS[2] * MLP_LAYER_DIMS[3]) as u64
    }

    /// Total multiply-adds performed by this model so far.
    pub fn mac_count(&self) -> u64 {
        self.macs.load(Ordering::Relaxed)
    }

    /// Runs the network on `batch` rows of `input` (row-major,
    /// `batch x 242`) and returns the `batch x 1` output.
    ///
    /// # Panics
    /// If `input` is shorter than `batch * 242`.
    pub fn forward<'s>(
        &self,
        input: &[f32],
        batch: usize,
        scratch: &'s mut MlpScratch,
    ) -> &'s [f32] {
        assert!(
            input.len() >= batch * MLP_INPUT_WIDTH,
            "input too short for batch {batch}"
        );
        let nlayers = self.weights.len();
        scratch.layers.resize_with(nlayers, Vec::new);
        let mut macs = 0u64;
        for layer in 0..nlayers {
            let (k, n) = (MLP_LAYER_DIMS[layer], MLP_LAYER_DIMS[layer + 1]);
            let (done, rest) = scratch.layers.split_at_mut(layer);
            let src: &[f32] = if layer == 0 { input } else { &done[layer - 1] };
            let dst = &mut rest[0];
            dst.clear();
            dst.resize(batch * n, 0.0);
            // SAFETY: src holds at least batch*k elements, the weights k*n and
            // dst exactly batch*n, all row-major with the strides given.
            unsafe {
                matrixmultiply::sgemm(
                    batch,
                    k,
                    n,
                    1.0,
                    src.as_ptr(),
                    k as isize,
                    1,
                    self.weights[layer].as_ptr(),
                    n as isize,
                    1,
                    0.0,
                    dst.as_mut_ptr(),
                    n as isize,
                    1,
                );
            }
            macs += (batch * k * n) as u64;
            if layer + 1 < nlayers {
                for v in dst.iter_mut() {
                    *v = v.max(0.0);
                }
            }
        }
        self.macs.fetch_add(macs, Ordering::Relaxed);
        &scratch.layers[nlayers - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_forward(model: &MlpTimingModel, input: &[f32], batch: usize) -> Vec<f32> {
        let mut cur = input[..batch * MLP_INPUT_WIDTH].to_vec();
        for layer in 0..3 {
            let (k, n) = (MLP_LAYER_DIMS[layer], MLP_LAYER_DIMS[layer + 1]);
            let w = model.layer_weights(layer);
            let mut next = vec![0.0f32; batch * n];
            for r in 0..batch {
                for j in 0..n {
                    let mut acc = 0.0f64;
                    for i in 0..k {
                        acc += cur[r * k + i] as f64 * w[i * n + j] as f64;
                    }
                    next[r * n + j] = if layer < 2 {
                        acc.max(0.0) as f32
                    } else {
                        acc as f32
                    };
                }
            }
            cur = next;
        }
        cur
    }

    #[test]
    fn weights_are_seeded_and_bounded() {
        let a = MlpTimingModel::new(11);
        let b = MlpTimingModel::new(11);
        let c = MlpTimingModel::new(12);
        for layer in 0..3 {
            assert_eq!(a.layer_weights(layer), b.layer_weights(layer));
            assert!(a
                .layer_weights(layer)
                .iter()
                .all(|w| (-1.0..=1.0).contains(w)));
        }
        assert_ne!(a.layer_weights(0), c.layer_weights(0));
        assert_eq!(a.layer_weights(1).len(), 256 * 256);
    }

    #[test]
    fn forward_matches_naive_reference() {
        let model = MlpTimingModel::new(3);
        let batch = 3;
        let input: Vec<f32> = (0..batch * MLP_INPUT_WIDTH)
            .map(|i| unit_f64(splitmix64(9, i as u64)) as f32)
            .collect();
        let mut scratch = MlpScratch::default();
        let out = model.forward(&input, batch, &mut scratch).to_vec();
        let expected = naive_forward(&model, &input, batch);
        assert_eq!(out.len(), batch);
        for (a, b) in out.iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-3 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn mac_count_is_linear_in_batch() {
        let model = MlpTimingModel::new(1);
        let input = vec![0.5f32; 40 * MLP_INPUT_WIDTH];
        let mut scratch = MlpScratch::default();
        for batch in [1usize, 7, 40] {
            let before = model.mac_count();
            model.forward(&input, batch, &mut scratch);
            assert_eq!(
                model.mac_count() - before,
                batch as u64 * MlpTimingModel::macs_per_row()
            );
        }
        assert_eq!(MlpTimingModel::macs_per_row(), 242 * 256 + 256 * 256 + 256);
    }
}
