//! Streaming thread clustering.
//!
//! Two windowed nearest-neighbor algorithms group incoming news messages
//! into event threads. [`OnlineClusterer`] assigns each message as it
//! arrives; [`MiniBatchClusterer`] buffers messages and resolves a whole
//! batch at once, scanning the window with batched matrix-style passes.
//! Both use exact nearest-neighbor search over a FIFO window of the last
//! `w` non-duplicate messages, and both keep full thread statistics that
//! outlive window eviction.

mod bench;
mod minibatch;
mod online;
mod threads;
mod window;

use std::fmt;
use std::str::FromStr;

use crate::embedding::FeatureVector;
use crate::error::{Error, Result};

pub use bench::{benchmark_clustering, write_latency_series, BenchResult, LatencySample};
pub use minibatch::MiniBatchClusterer;
pub use online::OnlineClusterer;
pub use threads::{Thread, ThreadMember, ThreadRegistry};
pub use window::Window;

/// Clustering parameters shared by both algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusteringConfig {
    /// Cosine-distance bound below which a message joins its neighbor's
    /// thread.
    pub threshold: f64,
    /// Number of most recent non-duplicate messages eligible as neighbors.
    pub window_size: usize,
    /// Mini-batch size (ignored by the online algorithm).
    pub batch_size: usize,
    /// Distances at or below this mark a duplicate.
    pub duplicate_epsilon: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            threshold: 0.23,
            window_size: 2000,
            batch_size: 50,
            duplicate_epsilon: 1e-9,
        }
    }
}

impl ClusteringConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 2.0) {
            return Err(Error::InvalidInput(
                "clustering threshold must lie in (0, 2)".into(),
            ));
        }
        if self.window_size == 0 {
            return Err(Error::InvalidInput("window_size must be > 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidInput("batch_size must be > 0".into()));
        }
        if self.duplicate_epsilon < 0.0 {
            return Err(Error::InvalidInput("duplicate_epsilon must be >= 0".into()));
        }
        if self.threshold <= self.duplicate_epsilon {
            return Err(Error::InvalidInput(
                "threshold must exceed duplicate_epsilon".into(),
            ));
        }
        Ok(())
    }
}

/// Which clustering algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Online,
    MiniBatch,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Online => write!(f, "online"),
            Algorithm::MiniBatch => write!(f, "minibatch"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "online" => Ok(Algorithm::Online),
            "minibatch" => Ok(Algorithm::MiniBatch),
            other => Err(Error::InvalidInput(format!(
                "unknown clustering algorithm `{other}` (expected online or minibatch)"
            ))),
        }
    }
}

/// Identifier of one thread; allocated in arrival order starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThreadId(pub u64);

impl fmt::Display for ThreadId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How one message was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    AssignedTo(ThreadId),
    NewThread(ThreadId),
    /// Near-zero distance to a buffered message; never inserted into the
    /// window and never joins a thread.
    Duplicate,
}

impl Outcome {
    pub fn thread_id(&self) -> Option<ThreadId> {
        match self {
            Outcome::AssignedTo(id) | Outcome::NewThread(id) => Some(*id),
            Outcome::Duplicate => None,
        }
    }
}

/// Per-message clustering result.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub message_id: String,
    pub outcome: Outcome,
    /// Distance to the nearest neighbor considered, when one existed.
    pub nearest_distance: Option<f64>,
}

/// One message entering the clusterer, with the metadata threads track.
#[derive(Debug, Clone)]
pub struct Item {
    pub message_id: String,
    pub author_id: String,
    pub timestamp: i64,
    /// Classifier confidence that the message is news.
    pub confidence: f64,
    /// Clustering-profile tokens; feed the thread term distributions.
    pub tokens: Vec<String>,
    pub vector: FeatureVector,
}

impl Item {
    /// Item with neutral metadata, for tests and benchmarks that only care
    /// about vectors.
    pub fn bare(message_id: impl Into<String>, vector: FeatureVector) -> Self {
        Self {
            message_id: message_id.into(),
            author_id: String::new(),
            timestamp: 0,
            confidence: 1.0,
            tokens: Vec::new(),
            vector,
        }
    }
}

/// Algorithm-agnostic streaming front: push items, collect assignments as
/// they resolve, flush the tail at end of stream.
pub enum StreamClusterer {
    Online(OnlineClusterer),
    MiniBatch(Box<MiniBatchClusterer>),
}

impl StreamClusterer {
    pub fn new(algorithm: Algorithm, cfg: ClusteringConfig) -> Result<Self> {
        Ok(match algorithm {
            Algorithm::Online => StreamClusterer::Online(OnlineClusterer::new(cfg)?),
            Algorithm::MiniBatch => {
                StreamClusterer::MiniBatch(Box::new(MiniBatchClusterer::new(cfg)?))
            }
        })
    }

    /// Feeds one item; returns whatever assignments became final.
    pub fn push(&mut self, item: &Item) -> Result<Vec<Assignment>> {
        match self {
            StreamClusterer::Online(c) => Ok(vec![c.step(item)?]),
            StreamClusterer::MiniBatch(c) => Ok(c.push(item)?.unwrap_or_default()),
        }
    }

    /// Resolves any still-buffered items (mini-batch tail).
    pub fn finish(&mut self) -> Vec<Assignment> {
        match self {
            StreamClusterer::Online(_) => Vec::new(),
            StreamClusterer::MiniBatch(c) => c.flush_partial(),
        }
    }

    pub fn threads(&self) -> Vec<Thread> {
        match self {
            StreamClusterer::Online(c) => c.threads(),
            StreamClusterer::MiniBatch(c) => c.threads(),
        }
    }
}

/// Writes the line-delimited assignment log:
/// `message_id <TAB> outcome <TAB> thread_id <TAB> distance`.
pub fn write_assignment_log(path: &std::path::Path, assignments: &[Assignment]) -> Result<()> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "message_id\toutcome\tthread_id\tdistance").map_err(|e| Error::io(path, e))?;
    for a in assignments {
        let (outcome, thread) = match a.outcome {
            Outcome::AssignedTo(id) => ("assigned", id.to_string()),
            Outcome::NewThread(id) => ("new", id.to_string()),
            Outcome::Duplicate => ("duplicate", String::new()),
        };
        let distance = a
            .nearest_distance
            .map(|d| format!("{d:.6}"))
            .unwrap_or_default();
        writeln!(out, "{}\t{}\t{}\t{}", a.message_id, outcome, thread, distance)
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
