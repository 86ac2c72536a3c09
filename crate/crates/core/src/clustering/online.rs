//! Fully online thread clustering: one nearest-neighbor decision per
//! arriving message.

use crate::error::{Error, Result};

use super::window::Window;
use super::{Assignment, ClusteringConfig, Item, Outcome, ThreadId, ThreadRegistry};

enum Decision {
    Duplicate,
    Assign(ThreadId),
    New,
}

pub struct OnlineClusterer {
    cfg: ClusteringConfig,
    window: Option<Window>,
    registry: ThreadRegistry,
    next_thread: u64,
}

impl OnlineClusterer {
    pub fn new(cfg: ClusteringConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            window: None,
            registry: ThreadRegistry::new(),
            next_thread: 0,
        })
    }

    fn fresh_thread(&mut self) -> ThreadId {
        let id = ThreadId(self.next_thread);
        self.next_thread += 1;
        id
    }

    fn window_for(&mut self, dim: usize) -> Result<&mut Window> {
        match &self.window {
            Some(w) if w.dim() != dim => Err(Error::DimensionMismatch {
                expected: w.dim(),
                actual: dim,
            }),
            Some(_) => Ok(self.window.as_mut().expect("window exists")),
            None => {
                self.window = Some(Window::new(self.cfg.window_size, dim));
                Ok(self.window.as_mut().expect("window just created"))
            }
        }
    }

    fn insert(&mut self, item: &Item, norm: f64, thread: ThreadId) {
        self.window
            .as_mut()
            .expect("window initialized before insertion")
            .push(item.vector.values(), norm, thread);
        self.registry.record(thread, item);
    }

    /// Resolves one message: duplicate when the nearest buffered message is
    /// at distance `<= duplicate_epsilon`, joins the neighbor's thread when
    /// the distance is under the threshold, otherwise opens a new thread.
    /// Non-duplicates enter the window with FIFO eviction.
    pub fn step(&mut self, item: &Item) -> Result<Assignment> {
        let dim = item.vector.dimension();
        if dim == 0 {
            return Err(Error::InvalidInput("zero-dimensional feature vector".into()));
        }
        let cfg = self.cfg;
        let norm = item.vector.norm();
        let nearest = self.window_for(dim)?.nearest(item.vector.values(), norm);

        let (decision, nearest_distance) = match nearest {
            None => (Decision::New, None),
            Some((_, d)) if d <= cfg.duplicate_epsilon => (Decision::Duplicate, Some(d)),
            Some((thread, d)) if d < cfg.threshold => (Decision::Assign(thread), Some(d)),
            Some((_, d)) => (Decision::New, Some(d)),
        };
        let outcome = match decision {
            Decision::Duplicate => Outcome::Duplicate,
            Decision::Assign(thread) => {
                self.insert(item, norm, thread);
                Outcome::AssignedTo(thread)
            }
            Decision::New => {
                let thread = self.fresh_thread();
                self.insert(item, norm, thread);
                Outcome::NewThread(thread)
            }
        };

        Ok(Assignment {
            message_id: item.message_id.clone(),
            outcome,
            nearest_distance,
        })
    }

    /// All threads ever created, with full statistics.
    pub fn threads(&self) -> Vec<super::Thread> {
        self.registry.snapshot()
    }

    pub fn registry(&self) -> &ThreadRegistry {
        &self.registry
    }

    /// Current window contents, oldest first (diagnostics and audits).
    pub fn window_entries(&self) -> Vec<(Vec<f64>, ThreadId)> {
        self.window.as_ref().map(Window::entries).unwrap_or_default()
    }

    pub fn window_len(&self) -> usize {
        self.window.as_ref().map_or(0, Window::len)
    }

    pub fn config(&self) -> &ClusteringConfig {
        &self.cfg
    }
}
