//! Thread bookkeeping.
//!
//! Threads are append-only records of every message ever assigned to them;
//! membership outlives window eviction because ranking needs total size
//! and growth, not just the recent slice.

use std::collections::{BTreeMap, BTreeSet};

use super::{Item, ThreadId};

/// One message's footprint inside a thread.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreadMember {
    pub message_id: String,
    pub author_id: String,
    pub timestamp: i64,
    pub confidence: f64,
}

/// A growing cluster of messages and its derived statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Thread {
    pub thread_id: ThreadId,
    /// Timestamp of the founding message.
    pub created_at: i64,
    /// Members in arrival order; doubles as the arrival-time series.
    pub members: Vec<ThreadMember>,
    /// Clustering-token counts across all members.
    term_counts: BTreeMap<String, u64>,
    total_terms: u64,
}

impl Thread {
    fn new(thread_id: ThreadId, created_at: i64) -> Self {
        Self {
            thread_id,
            created_at,
            members: Vec::new(),
            term_counts: BTreeMap::new(),
            total_terms: 0,
        }
    }

    fn record(&mut self, item: &Item) {
        self.members.push(ThreadMember {
            message_id: item.message_id.clone(),
            author_id: item.author_id.clone(),
            timestamp: item.timestamp,
            confidence: item.confidence,
        });
        for token in &item.tokens {
            *self.term_counts.entry(token.clone()).or_insert(0) += 1;
            self.total_terms += 1;
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Term → occurrence count over all members.
    pub fn term_counts(&self) -> &BTreeMap<String, u64> {
        &self.term_counts
    }

    /// Total number of clustering tokens across members.
    pub fn total_terms(&self) -> u64 {
        self.total_terms
    }

    pub fn mean_confidence(&self) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        self.members.iter().map(|m| m.confidence).sum::<f64>() / self.members.len() as f64
    }

    pub fn mean_timestamp(&self) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        self.members.iter().map(|m| m.timestamp as f64).sum::<f64>() / self.members.len() as f64
    }

    /// Distinct authors divided by member count.
    pub fn unique_author_ratio(&self) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        let distinct: BTreeSet<&str> =
            self.members.iter().map(|m| m.author_id.as_str()).collect();
        distinct.len() as f64 / self.members.len() as f64
    }

    /// Number of members whose timestamp falls in `[from, to]` /
    /// `[from, to)` depending on `inclusive_end`.
    pub fn arrivals_between(&self, from: i64, to: i64, inclusive_end: bool) -> usize {
        self.members
            .iter()
            .filter(|m| {
                m.timestamp >= from && (m.timestamp < to || (inclusive_end && m.timestamp == to))
            })
            .count()
    }

    pub fn member_ids(&self) -> Vec<String> {
        self.members.iter().map(|m| m.message_id.clone()).collect()
    }
}

/// Every thread ever created, keyed by id.
#[derive(Debug, Default)]
pub struct ThreadRegistry {
    threads: BTreeMap<ThreadId, Thread>,
}

impl ThreadRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub(super) fn record(&mut self, thread_id: ThreadId, item: &Item) {
        self.threads
            .entry(thread_id)
            .or_insert_with(|| Thread::new(thread_id, item.timestamp))
            .record(item);
    }

    pub fn len(&self) -> usize {
        self.threads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threads.is_empty()
    }

    pub fn get(&self, id: ThreadId) -> Option<&Thread> {
        self.threads.get(&id)
    }

    /// Immutable snapshot of all threads, ordered by id.
    pub fn snapshot(&self) -> Vec<Thread> {
        self.threads.values().cloned().collect()
    }
}
