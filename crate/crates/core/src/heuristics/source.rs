use serde::{Deserialize, Serialize};

use super::FastHeuristic;
use crate::grid::{Cell, GridState};
use crate::splitmix::{splitmix64, unit_f64};

/// Manhattan distance of the state's cell to the goal cell; heading ignored.
#[inline]
pub fn manhattan(s: &GridState, goal: &Cell) -> f64 {
    s.cell().manhattan(goal) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicKind {
    Manhattan,
    NoisyManhattan,
}

/// Manhattan distance scaled by a per-state factor drawn from `U[1-k, 1]`.
///
/// The factor is `1 - k * u(s)` where `u(s)` in `[0, 1)` hashes the full
/// `(x, y, heading)` state together with `noise_seed`, so repeated queries
/// return identical values and the result never exceeds the Manhattan
/// distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSource {
    pub kind: HeuristicKind,
    pub k: f64,
    pub noise_seed: u64,
    pub goal: Cell,
}

impl HeuristicSource {
    pub fn manhattan(goal: Cell) -> Self {
        HeuristicSource {
            kind: HeuristicKind::Manhattan,
            k: 0.0,
            noise_seed: 0,
            goal,
        }
    }

    /// # Panics
    /// If `k` is outside `[0, 1]`.
    pub fn noisy(goal: Cell, k: f64, noise_seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&k), "noise level {k} outside [0, 1]");
        HeuristicSource {
            kind: HeuristicKind::NoisyManhattan,
            k,
            noise_seed,
            goal,
        }
    }

    #[inline]
    pub fn value(&self, s: &GridState) -> f64 {
        match self.kind {
            HeuristicKind::Manhattan => manhattan(s, &self.goal),
            HeuristicKind::NoisyManhattan => noisy_value(s, self),
        }
    }
}

impl FastHeuristic<GridState> for HeuristicSource {
    #[inline]
    fn value(&self, state: &GridState) -> f64 {
        HeuristicSource::value(self, state)
    }
}

#[inline]
fn state_key(s: &GridState) -> u64 {
    ((s.x as u64) << 34) | ((s.y as u64) << 2) | s.heading.index() as u64
}

/// `h_m(s) * (1 - k * u(s))` with `u(s)` hashed from the state and the
/// source's noise seed.
#[inline]
pub fn noisy_value(s: &GridState, source: &HeuristicSource) -> f64 {
    let h = manhattan(s, &source.goal);
    let u = unit_f64(splitmix64(source.noise_seed, state_key(s)));
    h * (1.0 - source.k * u)
}
