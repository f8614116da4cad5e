use std::time::Instant;

use rustc_hash::FxHashSet;

use super::queues::{NodeId, NodeRecord, QueueSet};
use super::{
    Algorithm, BatchStats, Cost, ExpansionEvent, SearchDomain, SearchError, SearchMetrics,
    SearchOutcome, SearchParams, SearchStatus,
};
use crate::heuristics::{BatchEvaluator, EvaluatorError, FastHeuristic, HeuristicCache};

pub(super) type Observer<'a, S> = Option<Box<dyn FnMut(&ExpansionEvent<S>) + 'a>>;

pub(super) struct Engine<'a, 'e, D: SearchDomain, H> {
    domain: &'a D,
    cache: HeuristicCache<D::State, H>,
    params: SearchParams,
    algorithm: Algorithm,
    evaluator: Option<&'e mut dyn BatchEvaluator<D::State>>,
    observer: Observer<'a, D::State>,
    audit: bool,
    queues: QueueSet<D::State>,
    pending: FxHashSet<D::State>,
    metrics: SearchMetrics,
    batches: Vec<BatchStats>,
    successors: Vec<(D::State, Cost)>,
}

impl<'a, 'e, D, H> Engine<'a, 'e, D, H>
where
    D: SearchDomain,
    H: FastHeuristic<D::State>,
{
    pub(super) fn new(
        domain: &'a D,
        fast: H,
        params: SearchParams,
        algorithm: Algorithm,
        evaluator: Option<&'e mut dyn BatchEvaluator<D::State>>,
        observer: Observer<'a, D::State>,
        audit: bool,
    ) -> Self {
        Engine {
            domain,
            cache: HeuristicCache::new(fast),
            params,
            algorithm,
            evaluator,
            observer,
            audit,
            queues: QueueSet::new(params.w_so, params.w_h),
            pending: FxHashSet::default(),
            metrics: SearchMetrics::default(),
            batches: Vec::new(),
            successors: Vec::with_capacity(8),
        }
    }

    pub(super) fn run(mut self) -> Result<SearchOutcome<D::State>, SearchError> {
        let started = Instant::now();
        let start = self.domain.start();
        let h = self.cache.base_value(&start);
        let root = self.queues.create(NodeRecord::new(
            start,
            0,
            h,
            self.cache.lookup(&start),
            None,
        ));
        self.queues.set_best(start, root);
        self.queues.add_to_queues(root);

        let (status, goal) = loop {
            if self.audit {
                self.check_audit()?;
            }
            let Some(id) = self.queues.pop_focal() else {
                if self.algorithm == Algorithm::Blocking && !self.queues.waitlist().is_empty() {
                    self.flush_batch(true)?;
                    self.queues.update_focal();
                    continue;
                }
                break (SearchStatus::Exhausted, None);
            };
            debug_assert!(self.queues.node(id).in_open, "FOCAL node missing from OPEN");
            debug_assert!(
                self.queues.node(id).f_open() <= self.queues.node(id).admitted_at(),
                "FOCAL node was admitted above the bound"
            );
            let f_min = self.queues.f_min().unwrap_or(f64::INFINITY);
            self.queues.remove_from_open(id);

            let state = self.queues.node(id).state;
            debug_assert_eq!(self.queues.best(&state), Some(id), "stale node popped");
            if self.domain.is_goal(&state) {
                break (SearchStatus::SolutionFound, Some(id));
            }

            if self.algorithm == Algorithm::Nbba && self.lazy_refresh(id) {
                self.metrics.lazy_reinsertions += 1;
            } else {
                if self.metrics.expansions >= self.params.max_expansions {
                    break (SearchStatus::ExpansionLimitReached, None);
                }
                self.expand(id, f_min);
            }

            self.queues.update_focal();
            if self.algorithm.uses_batches()
                && self.queues.waitlist().len() >= self.params.batch_size
            {
                self.flush_batch(false)?;
            }
            debug_assert!(self.queues.waitlist().len() < self.params.batch_size);
        };

        let (path, cost) = match goal {
            Some(id) => (
                Some(reconstruct_path(&self.queues, id, &start)?),
                Some(self.queues.node(id).g),
            ),
            None => (None, None),
        };
        self.metrics.waitlist_residue = self.queues.waitlist().len();
        self.metrics.overlay_states = self.cache.overlay_len();
        self.metrics.wall_time = started.elapsed();
        Ok(SearchOutcome {
            status,
            path,
            cost,
            metrics: self.metrics,
            batches: self.batches,
        })
    }

    fn check_audit(&self) -> Result<(), SearchError> {
        self.queues.audit().map_err(|reason| SearchError::Audit {
            expansions: self.metrics.expansions,
            reason,
        })
    }

    /// Re-keys a popped node whose cached focal value changed since it was
    /// queued. Returns false if the value is unchanged and the node should
    /// be expanded.
    fn lazy_refresh(&mut self, id: NodeId) -> bool {
        let node = self.queues.node(id);
        let current = self.cache.lookup(&node.state);
        if current == node.h_focal {
            return false;
        }
        self.queues.node_mut(id).h_focal = current;
        self.queues.add_to_queues(id);
        true
    }

    fn expand(&mut self, id: NodeId, f_min: f64) {
        let (state, g) = {
            let n = self.queues.node(id);
            (n.state, n.g)
        };
        if let Some(observer) = self.observer.as_mut() {
            observer(&ExpansionEvent {
                index: self.metrics.expansions,
                state,
                g,
                f_min,
                waitlist_len: self.queues.waitlist().len(),
            });
        }
        self.metrics.expansions += 1;

        let mut successors = std::mem::take(&mut self.successors);
        successors.clear();
        self.domain.expand(&state, &mut successors);
        for &(next, step) in &successors {
            let next_g = g + step;
            if let Some(old) = self.queues.best(&next) {
                if self.queues.node(old).g <= next_g {
                    continue;
                }
                self.queues.supersede(old);
            }
            let cached = self.cache.contains(&next);
            let mut node = NodeRecord::new(
                next,
                next_g,
                self.cache.base_value(&next),
                self.cache.lookup(&next),
                Some(id),
            );
            node.focal_ready = self.algorithm != Algorithm::Blocking || cached;
            let child = self.queues.create(node);
            self.queues.set_best(next, child);
            self.metrics.generations += 1;
            self.queues.add_to_queues(child);
            if self.algorithm.uses_batches() && !cached && self.pending.insert(next) {
                self.queues.waitlist_push(child);
            }
        }
        self.successors = successors;
    }

    /// Evaluates every waitlisted state in one call and records the values in
    /// the overlay. Under the blocking algorithm the evaluated nodes are then
    /// offered to FOCAL; otherwise nodes already queued are left alone and
    /// picked up by [`Self::lazy_refresh`].
    fn flush_batch(&mut self, forced: bool) -> Result<(), SearchError> {
        let ids = self.queues.take_waitlist();
        if ids.is_empty() {
            return Ok(());
        }
        let states: Vec<D::State> = ids.iter().map(|&id| self.queues.node(id).state).collect();
        let evaluator = self
            .evaluator
            .as_mut()
            .ok_or(SearchError::MissingEvaluator(self.algorithm))?;
        let out = evaluator.evaluate(&states)?;
        if out.values.len() != states.len() {
            return Err(EvaluatorError::LengthMismatch {
                expected: states.len(),
                got: out.values.len(),
            }
            .into());
        }
        if let Some((index, &value)) = out
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(EvaluatorError::InvalidValue { index, value }.into());
        }
        self.cache
            .write(states.iter().copied().zip(out.values.iter().copied()));
        for s in &states {
            self.pending.remove(s);
        }

        if self.algorithm == Algorithm::Blocking {
            for (s, &v) in states.iter().zip(&out.values) {
                let Some(live) = self.queues.best(s) else {
                    continue;
                };
                let n = self.queues.node_mut(live);
                if n.in_open && !n.focal_ready {
                    n.focal_ready = true;
                    n.h_focal = v;
                    self.queues.offer_focal(live);
                }
            }
        }

        let size = states.len();
        self.metrics.flushes += 1;
        self.metrics.flushed_states += size as u64;
        self.metrics.inference_time += out.inference_time;
        if forced {
            self.metrics.forced_flushes += 1;
        } else {
            self.metrics.min_unforced_flush = Some(
                self.metrics
                    .min_unforced_flush
                    .map_or(size, |m| m.min(size)),
            );
        }
        self.batches.push(BatchStats {
            size,
            forced,
            inference_time: out.inference_time,
        });
        Ok(())
    }
}

/// Follows parent links from `goal` back to `start` and returns the states
/// in start-to-goal order.
pub fn reconstruct_path<S: Copy + Eq + std::hash::Hash>(
    queues: &QueueSet<S>,
    goal: NodeId,
    start: &S,
) -> Result<Vec<S>, SearchError> {
    let mut path = Vec::new();
    let mut cursor = Some(goal);
    while let Some(id) = cursor {
        let n = queues.node(id);
        path.push(n.state);
        cursor = n.parent;
        if path.len() > queues.nodes().len() {
            return Err(SearchError::BrokenParentChain { from: goal });
        }
    }
    if path.last() != Some(start) {
        return Err(SearchError::BrokenParentChain { from: goal });
    }
    path.reverse();
    Ok(path)
}
