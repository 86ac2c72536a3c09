//! Streaming news-event detection over short-text message streams.
//!
//! The pipeline has three stages: a feedforward neural classifier filters
//! news messages out of the stream (features are averaged word embeddings),
//! a windowed nearest-neighbor clusterer groups news messages into growing
//! event threads, and a ranking stage selects and orders candidate events
//! by size, growth, and content quality. The [`evaluation`] module carries
//! the full experimental harness: split protocol, clustering metrics
//! (homogeneity / completeness / V-measure), detection precision/recall/F1,
//! threshold sweeps, and a latency benchmark.
//!
//! Everything is deterministic given a master seed; all per-component
//! randomness is fanned out with [`seed::derive`].

pub mod classifier;
pub mod clustering;
pub mod config;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod ranking;
pub mod seed;

pub use error::{Error, Result};
