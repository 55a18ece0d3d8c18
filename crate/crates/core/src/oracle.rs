//! Exact ground truth: a growing hash table per window, sorted on demand.

use std::collections::{HashMap, HashSet};
use std::mem::size_of;

use crate::keyspace::Key;
use crate::metrics::{Footprint, MemoryFootprint};

/// One row of the exact ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruthEntry {
    pub key: Key,
    /// Exact magnitude, or exact distinct-element count for set signals.
    pub value: u64,
}

fn rank(mut entries: Vec<TruthEntry>, k: usize) -> Vec<TruthEntry> {
    entries.sort_unstable_by(|a, b| b.value.cmp(&a.value).then(a.key.cmp(&b.key)));
    entries.truncate(k);
    entries
}

/// Exact per-key totals of a scalar signal.
#[derive(Debug, Clone, Default)]
pub struct ScalarTruth {
    counts: HashMap<Key, u64>,
    total: u64,
}

impl ScalarTruth {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, key: Key, v: u64) {
        *self.counts.entry(key).or_insert(0) += v;
        self.total += v;
    }

    pub fn get(&self, key: Key) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct keys seen.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Exact top-`k`, magnitude descending, ties by ascending key. Returns
    /// everything when `k` exceeds the population.
    pub fn top_k(&self, k: usize) -> Vec<TruthEntry> {
        rank(
            self.counts
                .iter()
                .map(|(&key, &value)| TruthEntry { key, value })
                .collect(),
            k,
        )
    }

    pub fn reset(&mut self) {
        self.counts.clear();
        self.total = 0;
    }
}

impl Footprint for ScalarTruth {
    fn footprint(&self) -> MemoryFootprint {
        MemoryFootprint {
            counters: self.counts.len(),
            slots: 0,
            bytes: self.counts.capacity() * (size_of::<(Key, u64)>() + 1),
        }
    }
}

/// Exact per-key element sets of a set-valued signal.
#[derive(Debug, Clone, Default)]
pub struct SetTruth {
    sets: HashMap<Key, HashSet<u32>>,
}

impl SetTruth {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, key: Key, element: u32) {
        self.sets.entry(key).or_default().insert(element);
    }

    pub fn cardinality(&self, key: Key) -> u64 {
        self.sets.get(&key).map_or(0, |s| s.len() as u64)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn top_k(&self, k: usize) -> Vec<TruthEntry> {
        rank(
            self.sets
                .iter()
                .map(|(&key, s)| TruthEntry {
                    key,
                    value: s.len() as u64,
                })
                .collect(),
            k,
        )
    }

    pub fn reset(&mut self) {
        self.sets.clear();
    }
}

impl Footprint for SetTruth {
    fn footprint(&self) -> MemoryFootprint {
        let inner: usize = self
            .sets
            .values()
            .map(|s| s.capacity() * (size_of::<u32>() + 1))
            .sum();
        let elements: usize = self.sets.values().map(HashSet::len).sum();
        MemoryFootprint {
            counters: elements,
            slots: self.sets.len(),
            bytes: inner + self.sets.capacity() * (size_of::<(Key, HashSet<u32>)>() + 1),
        }
    }
}
