use std::hash::Hash;

use rustc_hash::FxHashMap;

use super::FastHeuristic;

/// Batch-evaluated values layered over a fast base heuristic.
///
/// Overlay entries are write-once: a later write for a state that already
/// has a value is ignored.
#[derive(Debug, Clone)]
pub struct HeuristicCache<S, H> {
    overlay: FxHashMap<S, f64>,
    base: H,
}

impl<S: Eq + Hash + Copy, H: FastHeuristic<S>> HeuristicCache<S, H> {
    pub fn new(base: H) -> Self {
        HeuristicCache {
            overlay: FxHashMap::default(),
            base,
        }
    }

    /// Overlay value if present, else the base value.
    #[inline]
    pub fn lookup(&self, s: &S) -> f64 {
        match self.overlay.get(s) {
            Some(v) => *v,
            None => self.base.value(s),
        }
    }

    /// The base heuristic, never the overlay.
    #[inline]
    pub fn base_value(&self, s: &S) -> f64 {
        self.base.value(s)
    }

    #[inline]
    pub fn contains(&self, s: &S) -> bool {
        self.overlay.contains_key(s)
    }

    /// Returns how many states were newly added.
    pub fn write<I: IntoIterator<Item = (S, f64)>>(&mut self, pairs: I) -> usize {
        let mut added = 0;
        for (s, v) in pairs {
            debug_assert!(v >= 0.0, "negative heuristic value {v}");
            if let std::collections::hash_map::Entry::Vacant(e) = self.overlay.entry(s) {
                e.insert(v);
                added += 1;
            }
        }
        added
    }

    pub fn overlay_len(&self) -> usize {
        self.overlay.len()
    }

    pub fn base(&self) -> &H {
        &self.base
    }
}
