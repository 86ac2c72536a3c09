//! Mini-batch thread clustering.
//!
//! Messages accumulate in a batch of size `b`; a flush resolves the whole
//! batch in two passes. Pass 1 finds each member's nearest neighbor in the
//! window with one batched scan. Pass 2 walks the still-undecided members
//! in arrival order and looks for a nearest neighbor among batch members
//! that already carry a thread id — a member decided earlier in pass 2 is
//! a valid neighbor for later ones. Survivors enter the window together,
//! evicting the oldest entries when capacity would be exceeded.

use crate::embedding::cosine_distance_raw;
use crate::error::{Error, Result};

use super::window::Window;
use super::{Assignment, ClusteringConfig, Item, Outcome, ThreadId, ThreadRegistry};

struct Pending {
    item: Item,
    norm: f64,
}

pub struct MiniBatchClusterer {
    cfg: ClusteringConfig,
    window: Option<Window>,
    registry: ThreadRegistry,
    batch: Vec<Pending>,
    next_thread: u64,
}

impl MiniBatchClusterer {
    pub fn new(cfg: ClusteringConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            window: None,
            registry: ThreadRegistry::new(),
            batch: Vec::with_capacity(cfg.batch_size),
            next_thread: 0,
        })
    }

    fn fresh_thread(&mut self) -> ThreadId {
        let id = ThreadId(self.next_thread);
        self.next_thread += 1;
        id
    }

    fn expected_dim(&self) -> Option<usize> {
        self.window
            .as_ref()
            .map(Window::dim)
            .or_else(|| self.batch.first().map(|p| p.item.vector.dimension()))
    }

    /// Buffers one message; returns the batch's assignments when this
    /// message filled the batch and triggered a flush.
    pub fn push(&mut self, item: &Item) -> Result<Option<Vec<Assignment>>> {
        let dim = item.vector.dimension();
        if dim == 0 {
            return Err(Error::InvalidInput("zero-dimensional feature vector".into()));
        }
        if let Some(expected) = self.expected_dim() {
            if expected != dim {
                return Err(Error::DimensionMismatch {
                    expected,
                    actual: dim,
                });
            }
        }
        self.batch.push(Pending {
            item: item.clone(),
            norm: item.vector.norm(),
        });
        if self.batch.len() == self.cfg.batch_size {
            return Ok(Some(self.flush()));
        }
        Ok(None)
    }

    /// Flushes a partial batch at end of stream; no message is dropped.
    pub fn flush_partial(&mut self) -> Vec<Assignment> {
        if self.batch.is_empty() {
            Vec::new()
        } else {
            self.flush()
        }
    }

    fn flush(&mut self) -> Vec<Assignment> {
        let n = self.batch.len();
        let dim = self.batch[0].item.vector.dimension();
        let cfg = self.cfg;
        if self.window.is_none() {
            self.window = Some(Window::new(cfg.window_size, dim));
        }

        let mut outcomes: Vec<Option<Outcome>> = vec![None; n];
        let mut distances: Vec<Option<f64>> = vec![None; n];

        // Pass 1: nearest neighbor in the window, one batched scan.
        let window = self.window.as_ref().expect("window created above");
        if !window.is_empty() {
            let queries: Vec<&[f64]> = self
                .batch
                .iter()
                .map(|p| p.item.vector.values())
                .collect();
            let norms: Vec<f64> = self.batch.iter().map(|p| p.norm).collect();
            for (i, hit) in window.nearest_batch(&queries, &norms).into_iter().enumerate() {
                let (thread, d) = hit.expect("window is non-empty");
                distances[i] = Some(d);
                if d < cfg.threshold {
                    outcomes[i] = Some(if d <= cfg.duplicate_epsilon {
                        Outcome::Duplicate
                    } else {
                        Outcome::AssignedTo(thread)
                    });
                }
            }
        }

        // Pass 2: undecided members look for the nearest already-assigned
        // batch member, in arrival order.
        for i in 0..n {
            if outcomes[i].is_some() {
                continue;
            }
            let mut best: Option<(ThreadId, f64)> = None;
            for (j, candidate) in outcomes.iter().enumerate() {
                if j == i {
                    continue;
                }
                let Some(thread) = candidate.as_ref().and_then(Outcome::thread_id) else {
                    continue;
                };
                let d = cosine_distance_raw(
                    self.batch[i].item.vector.values(),
                    self.batch[i].norm,
                    self.batch[j].item.vector.values(),
                    self.batch[j].norm,
                );
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((thread, d));
                }
            }
            match best {
                Some((thread, d)) if d < cfg.threshold => {
                    distances[i] = Some(distances[i].map_or(d, |x| x.min(d)));
                    outcomes[i] = Some(if d <= cfg.duplicate_epsilon {
                        Outcome::Duplicate
                    } else {
                        Outcome::AssignedTo(thread)
                    });
                }
                other => {
                    if let Some((_, d)) = other {
                        distances[i] = Some(distances[i].map_or(d, |x| x.min(d)));
                    }
                    let thread = self.fresh_thread();
                    outcomes[i] = Some(Outcome::NewThread(thread));
                }
            }
        }

        // Insert survivors; evict the oldest entries when the batch would
        // overflow the window.
        let n_add = outcomes
            .iter()
            .filter(|o| !matches!(o, Some(Outcome::Duplicate)))
            .count();
        let window = self.window.as_mut().expect("window created above");
        if window.len() + n_add > window.capacity() {
            let excess = window.len().min(n_add);
            window.evict_oldest(excess);
        }
        let mut assignments = Vec::with_capacity(n);
        let drained: Vec<Pending> = self.batch.drain(..).collect();
        for ((pending, outcome), nearest_distance) in
            drained.into_iter().zip(outcomes).zip(distances)
        {
            let outcome = outcome.expect("every member decided");
            if let Some(thread) = outcome.thread_id() {
                let window = self.window.as_mut().expect("window exists");
                window.push(pending.item.vector.values(), pending.norm, thread);
                self.registry.record(thread, &pending.item);
            }
            assignments.push(Assignment {
                message_id: pending.item.message_id,
                outcome,
                nearest_distance,
            });
        }
        assignments
    }

    /// All threads ever created, with full statistics.
    pub fn threads(&self) -> Vec<super::Thread> {
        self.registry.snapshot()
    }

    pub fn registry(&self) -> &ThreadRegistry {
        &self.registry
    }

    pub fn window_len(&self) -> usize {
        self.window.as_ref().map_or(0, Window::len)
    }

    pub fn pending(&self) -> usize {
        self.batch.len()
    }

    pub fn config(&self) -> &ClusteringConfig {
        &self.cfg
    }
}
