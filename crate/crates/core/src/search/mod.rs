//! Bounded-suboptimal focal searches with batched heuristic evaluation.
//!
//! Three algorithms share one engine:
//!
//! * [`Algorithm::Focal`]: plain focal search. OPEN is ordered by
//!   `g + h_fast`, FOCAL by `g + w_h * h_fast`, and a node enters FOCAL when
//!   its OPEN value is within `w_so` of the OPEN minimum.
//! * [`Algorithm::Nbba`]: non-blocking batch A*. Successors enter OPEN and
//!   FOCAL right away keyed by the fast heuristic and are also queued on a
//!   waitlist. Once the waitlist holds `B` states it is evaluated in one
//!   batch and the results go to a cache overlay. A FOCAL pop whose cached
//!   value has changed since insertion is re-keyed instead of expanded.
//! * [`Algorithm::Blocking`]: the blocking K-focal baseline. Successors enter
//!   OPEN right away but only reach FOCAL once their batch value is known;
//!   when FOCAL runs dry, a partial batch is flushed.
//!
//! OPEN is always keyed by the base admissible heuristic captured at
//! generation, so every returned solution costs at most `w_so` times the
//! optimum whatever the batch evaluator returns.

mod engine;
mod queues;

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics::{BatchEvaluator, EvaluatorError, FastHeuristic};

pub use engine::reconstruct_path;
pub use queues::{focal_qualifies, NodeId, NodeRecord, QueueSet};

/// Path costs are exact integers.
pub type Cost = u64;

/// A deterministic search space with integer step costs.
pub trait SearchDomain {
    type State: Copy + Eq + Hash + fmt::Debug + fmt::Display;

    fn start(&self) -> Self::State;

    fn is_goal(&self, s: &Self::State) -> bool;

    /// Appends `(successor, step cost)` pairs in a fixed order.
    fn expand(&self, s: &Self::State, out: &mut Vec<(Self::State, Cost)>);

    /// Cost of the single step `from -> to`, if it is a legal action.
    fn step_cost(&self, from: &Self::State, to: &Self::State) -> Option<Cost>;
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
    #[error("batch evaluation failed: {0}")]
    Evaluator(#[from] EvaluatorError),
    #[error("{0} needs a batch evaluator")]
    MissingEvaluator(Algorithm),
    #[error("parent chain from node {from} does not reach the start state")]
    BrokenParentChain { from: NodeId },
    #[error("queue audit failed after {expansions} expansions: {reason}")]
    Audit { expansions: u64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nbba,
    Blocking,
    Focal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Nbba, Algorithm::Blocking, Algorithm::Focal];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Nbba => "nbba",
            Algorithm::Blocking => "blocking",
            Algorithm::Focal => "focal",
        }
    }

    pub fn uses_batches(self) -> bool {
        !matches!(self, Algorithm::Focal)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nbba" => Ok(Algorithm::Nbba),
            "blocking" => Ok(Algorithm::Blocking),
            "focal" => Ok(Algorithm::Focal),
            other => Err(format!(
                "unknown algorithm '{other}' (expected nbba, blocking or focal)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Suboptimality bound, at least 1.
    pub w_so: f64,
    /// Weight on the focal heuristic, at least 1.
    pub w_h: f64,
    pub batch_size: usize,
    pub max_expansions: u64,
}

impl SearchParams {
    pub fn new(
        w_so: f64,
        w_h: f64,
        batch_size: usize,
        max_expansions: u64,
    ) -> Result<Self, SearchError> {
        let p = SearchParams {
            w_so,
            w_h,
            batch_size,
            max_expansions,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if !(1.0..f64::INFINITY).contains(&self.w_so) {
            return Err(SearchError::InvalidParams(format!(
                "w_so must be a finite value >= 1, got {}",
                self.w_so
            )));
        }
        if !(1.0..f64::INFINITY).contains(&self.w_h) {
            return Err(SearchError::InvalidParams(format!(
                "w_h must be a finite value >= 1, got {}",
                self.w_h
            )));
        }
        if self.batch_size == 0 {
            return Err(SearchError::InvalidParams(
                "batch size must be at least 1".into(),
            ));
        }
        if self.max_expansions == 0 {
            return Err(SearchError::InvalidParams(
                "max_expansions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            w_so: 2.5,
            w_h: 2.5,
            batch_size: 25,
            max_expansions: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    SolutionFound,
    ExpansionLimitReached,
    Exhausted,
}

impl SearchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchStatus::SolutionFound => "solution_found",
            SearchStatus::ExpansionLimitReached => "expansion_limit_reached",
            SearchStatus::Exhausted => "exhausted",
        }
    }
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SearchStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solution_found" => Ok(SearchStatus::SolutionFound),
            "expansion_limit_reached" => Ok(SearchStatus::ExpansionLimitReached),
            "exhausted" => Ok(SearchStatus::Exhausted),
            other => Err(format!("unknown search status '{other}'")),
        }
    }
}

/// One call to the batch evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchStats {
    pub size: usize,
    /// Flushed below the target size because FOCAL ran dry (blocking only).
    pub forced: bool,
    pub inference_time: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchMetrics {
    pub expansions: u64,
    /// FOCAL pops that were re-keyed from the overlay instead of expanded.
    pub lazy_reinsertions: u64,
    /// Successor nodes created (new states and strict g improvements).
    pub generations: u64,
    pub flushes: u64,
    pub forced_flushes: u64,
    pub flushed_states: u64,
    /// Smallest batch among the flushes that were not forced.
    pub min_unforced_flush: Option<usize>,
    pub inference_time: Duration,
    pub wall_time: Duration,
    /// States left on the waitlist when the search stopped.
    pub waitlist_residue: usize,
    pub overlay_states: usize,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome<S> {
    pub status: SearchStatus,
    /// Start-to-goal states, present iff a solution was found.
    pub path: Option<Vec<S>>,
    pub cost: Option<Cost>,
    pub metrics: SearchMetrics,
    pub batches: Vec<BatchStats>,
}

impl<S> SearchOutcome<S> {
    pub fn solved(&self) -> bool {
        self.status == SearchStatus::SolutionFound
    }
}

/// Emitted once per expansion (not for lazy re-keying pops).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionEvent<S> {
    /// 0-based expansion index.
    pub index: u64,
    pub state: S,
    pub g: Cost,
    /// Minimum `F_open` over OPEN including the node being expanded.
    pub f_min: f64,
    pub waitlist_len: usize,
}

impl<S: fmt::Display> ExpansionEvent<S> {
    /// Stable text form of the algorithm-independent fields, used to compare
    /// expansion sequences across algorithms.
    pub fn log_line(&self) -> String {
        format!("{} {} {} {:?}", self.index, self.state, self.g, self.f_min)
    }
}

/// Configures and runs one search.
pub struct Planner<'a, D: SearchDomain, H> {
    domain: &'a D,
    fast: H,
    params: SearchParams,
    observer: engine::Observer<'a, D::State>,
    audit: bool,
}

impl<'a, D, H> Planner<'a, D, H>
where
    D: SearchDomain,
    H: FastHeuristic<D::State>,
{
    pub fn new(domain: &'a D, fast: H, params: SearchParams) -> Self {
        Planner {
            domain,
            fast,
            params,
            observer: None,
            audit: false,
        }
    }

    /// Receives an event for every expansion.
    pub fn observe(mut self, f: impl FnMut(&ExpansionEvent<D::State>) + 'a) -> Self {
        self.observer = Some(Box::new(f));
        self
    }

    /// Runs the full queue audit on every iteration. Linear per iteration, so
    /// only meant for small instances.
    pub fn with_audit(mut self, on: bool) -> Self {
        self.audit = on;
        self
    }

    pub fn run(
        self,
        algorithm: Algorithm,
        evaluator: Option<&mut dyn BatchEvaluator<D::State>>,
    ) -> Result<SearchOutcome<D::State>, SearchError> {
        self.params.validate()?;
        if algorithm.uses_batches() && evaluator.is_none() {
            return Err(SearchError::MissingEvaluator(algorithm));
        }
        engine::Engine::new(
            self.domain,
            self.fast,
            self.params,
            algorithm,
            evaluator,
            self.observer,
            self.audit,
        )
        .run()
    }

    pub fn focal_search(self) -> Result<SearchOutcome<D::State>, SearchError> {
        self.run(Algorithm::Focal, None)
    }

    pub fn nbba_search(
        self,
        evaluator: &mut dyn BatchEvaluator<D::State>,
    ) -> Result<SearchOutcome<D::State>, SearchError> {
        self.run(Algorithm::Nbba, Some(evaluator))
    }

    pub fn blocking_kfocal_search(
        self,
        evaluator: &mut dyn BatchEvaluator<D::State>,
    ) -> Result<SearchOutcome<D::State>, SearchError> {
        self.run(Algorithm::Blocking, Some(evaluator))
    }
}

/// Runs `algorithm` with default options. `evaluator` may be `None` only
/// for [`Algorithm::Focal`].
pub fn run<D, H>(
    algorithm: Algorithm,
    domain: &D,
    fast: H,
    evaluator: Option<&mut dyn BatchEvaluator<D::State>>,
    params: SearchParams,
) -> Result<SearchOutcome<D::State>, SearchError>
where
    D: SearchDomain,
    H: FastHeuristic<D::State>,
{
    Planner::new(domain, fast, params).run(algorithm, evaluator)
}

pub fn focal_search<D, H>(
    domain: &D,
    fast: H,
    params: SearchParams,
) -> Result<SearchOutcome<D::State>, SearchError>
where
    D: SearchDomain,
    H: FastHeuristic<D::State>,
{
    Planner::new(domain, fast, params).focal_search()
}

pub fn nbba_search<D, H>(
    domain: &D,
    fast: H,
    evaluator: &mut dyn BatchEvaluator<D::State>,
    params: SearchParams,
) -> Result<SearchOutcome<D::State>, SearchError>
where
    D: SearchDomain,
    H: FastHeuristic<D::State>,
{
    Planner::new(domain, fast, params).nbba_search(evaluator)
}

pub fn blocking_kfocal_search<D, H>(
    domain: &D,
    fast: H,
    evaluator: &mut dyn BatchEvaluator<D::State>,
    params: SearchParams,
) -> Result<SearchOutcome<D::State>, SearchError>
where
    D: SearchDomain,
    H: FastHeuristic<D::State>,
{
    Planner::new(domain, fast, params).blocking_kfocal_search(evaluator)
}
