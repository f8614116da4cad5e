//! Bounded-suboptimal heuristic search with batched heuristic evaluation.
//!
//! * [`search`]: non-blocking batch A*, the blocking K-focal baseline and
//!   plain focal search over any [`search::SearchDomain`].
//! * [`grid`]: the (x, y, heading) sand-trap grid world.
//! * [`heuristics`]: noisy Manhattan heuristics, the batch overlay cache and
//!   a simulated neural-network evaluator.
//! * [`harness`]: experiment sweeps, the Dijkstra oracle and result files.

pub mod grid;
pub mod harness;
pub mod heuristics;
pub mod search;
pub mod splitmix;
