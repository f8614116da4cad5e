//! OPEN/FOCAL bookkeeping shared by all three searches.
//!
//! OPEN is an ordered set keyed by `F_open = g + h_open` so that its minimum
//! can be read, arbitrary nodes removed, and key ranges scanned. FOCAL is a
//! binary heap keyed by `F_focal = g + w_h * h_focal` with lazy deletion: an
//! entry is live only while its node is flagged `in_focal` and the entry's
//! sequence number matches the node's.
//!
//! FOCAL admission is incremental. `max_threshold` is the highest
//! `w_so * f_min` ever used to scan OPEN; every OPEN node at or below it is
//! either in FOCAL, waiting for its batch value, or parked in `deferred`.
//! Raising the threshold scans only the new slice of OPEN, and dips of
//! `f_min` (inconsistent heuristics) never trigger rescans.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};
use std::hash::Hash;
use std::ops::Bound;

use rustc_hash::FxHashMap;

use super::Cost;

pub type NodeId = u32;

/// True iff `f_open <= w_so * f_min`.
#[inline]
pub fn focal_qualifies(f_open: f64, f_min: f64, w_so: f64) -> bool {
    f_open <= w_so * f_min
}

#[derive(Debug, Clone)]
pub struct NodeRecord<S> {
    pub state: S,
    pub g: Cost,
    /// Base admissible value, fixed at generation.
    pub h_open: f64,
    /// Value ordering FOCAL; may be refreshed from the batch overlay.
    pub h_focal: f64,
    pub parent: Option<NodeId>,
    pub in_open: bool,
    pub in_focal: bool,
    pub in_waitlist: bool,
    /// Blocking search only: false until the node's batch value is known.
    pub focal_ready: bool,
    seq: u64,
    admitted_at: f64,
}

impl<S> NodeRecord<S> {
    pub fn new(state: S, g: Cost, h_open: f64, h_focal: f64, parent: Option<NodeId>) -> Self {
        NodeRecord {
            state,
            g,
            h_open,
            h_focal,
            parent,
            in_open: false,
            in_focal: false,
            in_waitlist: false,
            focal_ready: true,
            seq: 0,
            admitted_at: f64::NAN,
        }
    }

    #[inline]
    pub fn f_open(&self) -> f64 {
        self.g as f64 + self.h_open
    }

    #[inline]
    pub fn f_focal(&self, w_h: f64) -> f64 {
        self.g as f64 + w_h * self.h_focal
    }

    /// Insertion sequence number of the node's current queue entries.
    pub fn seq(&self) -> u64 {
        self.seq
    }

    /// The admission threshold in force when the node last entered FOCAL.
    pub fn admitted_at(&self) -> f64 {
        self.admitted_at
    }
}

/// Queue key: value ascending, then larger `g`, then insertion order.
#[derive(Debug, Clone, Copy)]
struct Key {
    f: f64,
    g: Cost,
    seq: u64,
    id: NodeId,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.f
            .total_cmp(&other.f)
            .then_with(|| other.g.cmp(&self.g))
            .then_with(|| self.seq.cmp(&other.seq))
            .then_with(|| self.id.cmp(&other.id))
    }
}

#[derive(Debug)]
pub struct QueueSet<S> {
    nodes: Vec<NodeRecord<S>>,
    open: BTreeSet<Key>,
    focal: BinaryHeap<Reverse<Key>>,
    deferred: BinaryHeap<Reverse<Key>>,
    waitlist: Vec<NodeId>,
    best: FxHashMap<S, NodeId>,
    w_so: f64,
    w_h: f64,
    max_threshold: f64,
    next_seq: u64,
}

impl<S: Copy + Eq + Hash> QueueSet<S> {
    pub fn new(w_so: f64, w_h: f64) -> Self {
        QueueSet {
            nodes: Vec::new(),
            open: BTreeSet::new(),
            focal: BinaryHeap::new(),
            deferred: BinaryHeap::new(),
            waitlist: Vec::new(),
            best: FxHashMap::default(),
            w_so,
            w_h,
            max_threshold: f64::NEG_INFINITY,
            next_seq: 0,
        }
    }

    /// Stores a node in the arena without queueing it.
    pub fn create(&mut self, node: NodeRecord<S>) -> NodeId {
        let id = NodeId::try_from(self.nodes.len()).expect("node arena exceeds u32 ids");
        self.nodes.push(node);
        id
    }

    #[inline]
    pub fn node(&self, id: NodeId) -> &NodeRecord<S> {
        &self.nodes[id as usize]
    }

    #[inline]
    pub fn node_mut(&mut self, id: NodeId) -> &mut NodeRecord<S> {
        &mut self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[NodeRecord<S>] {
        &self.nodes
    }

    /// The node currently holding the best known `g` for `state`.
    #[inline]
    pub fn best(&self, state: &S) -> Option<NodeId> {
        self.best.get(state).copied()
    }

    #[inline]
    pub fn best_g(&self, state: &S) -> Option<Cost> {
        self.best(state).map(|id| self.node(id).g)
    }

    pub fn set_best(&mut self, state: S, id: NodeId) {
        debug_assert!(
            self.best_g(&state).is_none_or(|g| self.node(id).g < g),
            "best g may only decrease"
        );
        self.best.insert(state, id);
    }

    /// Minimum `F_open` over OPEN.
    #[inline]
    pub fn f_min(&self) -> Option<f64> {
        self.open.first().map(|k| k.f)
    }

    pub fn open_len(&self) -> usize {
        self.open.len()
    }

    fn open_key(&self, id: NodeId) -> Key {
        let n = self.node(id);
        Key {
            f: n.f_open(),
            g: n.g,
            seq: n.seq,
            id,
        }
    }

    fn admit(&mut self, id: NodeId, threshold: f64) {
        let w_h = self.w_h;
        let n = &mut self.nodes[id as usize];
        debug_assert!(n.in_open && !n.in_focal && n.focal_ready);
        n.in_focal = true;
        n.admitted_at = threshold;
        let key = Key {
            f: n.f_focal(w_h),
            g: n.g,
            seq: n.seq,
            id,
        };
        self.focal.push(Reverse(key));
    }

    /// Inserts into OPEN and, if the node is focal-ready and within
    /// `w_so * f_min`, into FOCAL.
    pub fn add_to_queues(&mut self, id: NodeId) {
        let seq = self.next_seq;
        self.next_seq += 1;
        {
            let n = &mut self.nodes[id as usize];
            debug_assert!(!n.in_open && !n.in_focal, "node queued twice");
            n.seq = seq;
            n.in_open = true;
        }
        let key = self.open_key(id);
        self.open.insert(key);
        if self.node(id).focal_ready {
            self.offer_focal(id);
        }
    }

    /// Admits a focal-ready OPEN node if it qualifies now, otherwise parks it
    /// so that a later threshold rise finds it.
    pub fn offer_focal(&mut self, id: NodeId) {
        let f_min = self.f_min().expect("offered node must be in OPEN");
        let f = self.node(id).f_open();
        if focal_qualifies(f, f_min, self.w_so) {
            self.admit(id, self.w_so * f_min);
        } else if f <= self.max_threshold {
            let key = self.open_key(id);
            self.deferred.push(Reverse(key));
        }
    }

    /// Admits every focal-ready OPEN node with `F_open <= w_so * f_min`.
    pub fn update_focal(&mut self) {
        let Some(f_min) = self.f_min() else {
            return;
        };
        let threshold = self.w_so * f_min;
        while let Some(Reverse(key)) = self.deferred.peek().copied() {
            if key.f > threshold {
                break;
            }
            self.deferred.pop();
            let n = self.node(key.id);
            if n.in_open && !n.in_focal && n.focal_ready && n.seq == key.seq {
                self.admit(key.id, threshold);
            }
        }
        if threshold > self.max_threshold {
            let lower = Key {
                f: self.max_threshold,
                g: 0,
                seq: u64::MAX,
                id: NodeId::MAX,
            };
            let admit: Vec<NodeId> = self
                .open
                .range((Bound::Excluded(lower), Bound::Unbounded))
                .take_while(|k| k.f <= threshold)
                .filter(|k| {
                    let n = self.node(k.id);
                    !n.in_focal && n.focal_ready
                })
                .map(|k| k.id)
                .collect();
            for id in admit {
                self.admit(id, threshold);
            }
            self.max_threshold = threshold;
        }
    }

    /// Pops the best live FOCAL entry. The node stays in OPEN.
    pub fn pop_focal(&mut self) -> Option<NodeId> {
        while let Some(Reverse(key)) = self.focal.pop() {
            let n = &mut self.nodes[key.id as usize];
            if n.in_focal && n.seq == key.seq {
                n.in_focal = false;
                return Some(key.id);
            }
        }
        None
    }

    pub fn remove_from_open(&mut self, id: NodeId) {
        if self.node(id).in_open {
            let key = self.open_key(id);
            let removed = self.open.remove(&key);
            debug_assert!(removed, "OPEN entry missing");
            let n = &mut self.nodes[id as usize];
            n.in_open = false;
            n.in_focal = false;
        }
    }

    /// Drops a node from both queues, e.g. when a cheaper path to its state
    /// is found.
    pub fn supersede(&mut self, id: NodeId) {
        self.remove_from_open(id);
    }

    pub fn waitlist(&self) -> &[NodeId] {
        &self.waitlist
    }

    pub fn waitlist_push(&mut self, id: NodeId) {
        let n = &mut self.nodes[id as usize];
        debug_assert!(!n.in_waitlist, "node waitlisted twice");
        n.in_waitlist = true;
        self.waitlist.push(id);
    }

    pub fn take_waitlist(&mut self) -> Vec<NodeId> {
        let ids = std::mem::take(&mut self.waitlist);
        for &id in &ids {
            self.nodes[id as usize].in_waitlist = false;
        }
        ids
    }

    /// Number of live FOCAL entries per node, for audits.
    pub fn live_focal_entries(&self) -> FxHashMap<NodeId, usize> {
        let mut counts = FxHashMap::default();
        for Reverse(k) in self.focal.iter() {
            let n = self.node(k.id);
            if n.in_focal && n.seq == k.seq {
                *counts.entry(k.id).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Ids of the nodes in OPEN, in `F_open` order.
    pub fn open_ids(&self) -> Vec<NodeId> {
        self.open.iter().map(|k| k.id).collect()
    }

    /// Full consistency check; linear in the number of nodes.
    pub fn audit(&self) -> Result<(), String> {
        let live = self.live_focal_entries();
        let mut open_count = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            let id = i as NodeId;
            if n.in_open {
                open_count += 1;
                if !self.open.contains(&self.open_key(id)) {
                    return Err(format!("node {id} flagged in OPEN but has no entry"));
                }
            }
            if n.in_focal {
                if !n.in_open {
                    return Err(format!("node {id} in FOCAL but not in OPEN"));
                }
                if live.get(&id) != Some(&1) {
                    return Err(format!(
                        "node {id} has {:?} live FOCAL entries",
                        live.get(&id)
                    ));
                }
                if n.f_open().is_nan() || n.f_open() > n.admitted_at {
                    return Err(format!(
                        "node {id} F_open {} exceeds its admission threshold {}",
                        n.f_open(),
                        n.admitted_at
                    ));
                }
            }
        }
        if open_count != self.open.len() {
            return Err(format!(
                "{} OPEN entries but {open_count} flagged nodes",
                self.open.len()
            ));
        }
        if live.len() != self.nodes.iter().filter(|n| n.in_focal).count() {
            return Err("live FOCAL entries without in_focal flag".into());
        }
        for (state, &id) in &self.best {
            if self.node(id).state != *state {
                return Err(format!(
                    "best map entry points at node {id} of another state"
                ));
            }
        }
        Ok(())
    }
}
