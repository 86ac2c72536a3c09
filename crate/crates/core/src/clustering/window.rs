//! The FIFO candidate window (the set of recent non-duplicate messages).
//!
//! Entries live in one flat ring buffer so searches stream contiguous
//! memory. The online scan visits entries oldest-first; the batched scan
//! walks the same entries in the same order per query, so both produce
//! bit-identical distances and the same earliest-wins tie-breaking.

use super::ThreadId;
use crate::embedding::cosine_distance_raw;

pub struct Window {
    capacity: usize,
    dim: usize,
    /// Row-major vector storage, `capacity` rows once saturated.
    data: Vec<f64>,
    norms: Vec<f64>,
    threads: Vec<ThreadId>,
    /// Index of the oldest row.
    head: usize,
    len: usize,
}

impl Window {
    pub fn new(capacity: usize, dim: usize) -> Self {
        assert!(capacity > 0 && dim > 0);
        Self {
            capacity,
            dim,
            data: Vec::new(),
            norms: Vec::new(),
            threads: Vec::new(),
            head: 0,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, slot: usize) -> &[f64] {
        &self.data[slot * self.dim..(slot + 1) * self.dim]
    }

    /// Physical slot of the i-th oldest entry.
    fn slot_of(&self, age_index: usize) -> usize {
        (self.head + age_index) % self.capacity
    }

    /// Appends an entry, evicting the oldest first when full.
    pub fn push(&mut self, vector: &[f64], norm: f64, thread: ThreadId) {
        debug_assert_eq!(vector.len(), self.dim);
        if self.data.len() < self.capacity * self.dim {
            debug_assert_eq!(self.head, 0);
            self.data.extend_from_slice(vector);
            self.norms.push(norm);
            self.threads.push(thread);
            self.len += 1;
            return;
        }
        let slot = if self.len == self.capacity {
            // Overwrite the oldest row and advance the head.
            let slot = self.head;
            self.head = (self.head + 1) % self.capacity;
            slot
        } else {
            let slot = (self.head + self.len) % self.capacity;
            self.len += 1;
            slot
        };
        self.data[slot * self.dim..(slot + 1) * self.dim].copy_from_slice(vector);
        self.norms[slot] = norm;
        self.threads[slot] = thread;
    }

    /// Removes the `n` oldest entries (all of them when `n >= len`).
    pub fn evict_oldest(&mut self, n: usize) {
        let n = n.min(self.len);
        if self.data.len() == self.capacity * self.dim {
            self.head = (self.head + n) % self.capacity;
        } else {
            // Ring not yet saturated: physically drop the first rows so the
            // append path stays contiguous.
            self.data.drain(0..n * self.dim);
            self.norms.drain(0..n);
            self.threads.drain(0..n);
        }
        self.len -= n;
    }

    /// Exact nearest neighbor by cosine distance; earliest-inserted entry
    /// wins ties. Returns the entry's thread and distance.
    pub fn nearest(&self, query: &[f64], query_norm: f64) -> Option<(ThreadId, f64)> {
        if self.len == 0 {
            return None;
        }
        let mut best: Option<(ThreadId, f64)> = None;
        for age in 0..self.len {
            let slot = self.slot_of(age);
            let d = cosine_distance_raw(query, query_norm, self.row(slot), self.norms[slot]);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((self.threads[slot], d));
            }
        }
        best
    }

    /// Nearest neighbors for a batch of queries in one pass over the
    /// window. Window rows stream once while all queries update, so large
    /// windows are read from memory once per flush instead of once per
    /// message. Results equal per-query [`Window::nearest`] exactly.
    pub fn nearest_batch(&self, queries: &[&[f64]], query_norms: &[f64]) -> Vec<Option<(ThreadId, f64)>> {
        debug_assert_eq!(queries.len(), query_norms.len());
        if self.len == 0 {
            return vec![None; queries.len()];
        }
        let mut best: Vec<Option<(ThreadId, f64)>> = vec![None; queries.len()];
        for age in 0..self.len {
            let slot = self.slot_of(age);
            let row = self.row(slot);
            let row_norm = self.norms[slot];
            let thread = self.threads[slot];
            for (q, (query, query_norm)) in queries.iter().zip(query_norms).enumerate() {
                let d = cosine_distance_raw(query, *query_norm, row, row_norm);
                if best[q].is_none_or(|(_, bd)| d < bd) {
                    best[q] = Some((thread, d));
                }
            }
        }
        best
    }

    /// Current window contents, oldest first. Used by audits and the
    /// brute-force search oracle.
    pub fn entries(&self) -> Vec<(Vec<f64>, ThreadId)> {
        (0..self.len)
            .map(|age| {
                let slot = self.slot_of(age);
                (self.row(slot).to_vec(), self.threads[slot])
            })
            .collect()
    }
}
