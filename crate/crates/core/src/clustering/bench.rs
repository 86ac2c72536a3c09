//! Per-message clustering latency measurement.
//!
//! The online algorithm is timed per step; the mini-batch algorithm is
//! timed per flush and the flush time amortized evenly over the batch
//! members. The plateau starts once the window first reaches capacity —
//! from there the scan cost stops growing.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};

use super::{Algorithm, ClusteringConfig, Item, MiniBatchClusterer, OnlineClusterer};

/// One point of the latency series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencySample {
    /// Number of messages clustered so far (1-based).
    pub messages_clustered: usize,
    /// Per-message wall-clock seconds (amortized for mini-batch).
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub algorithm: Algorithm,
    pub samples: Vec<LatencySample>,
    /// Index of the first sample taken with a full window.
    pub plateau_start: Option<usize>,
    /// Mean per-message latency over the plateau (seconds).
    pub plateau_mean: f64,
    /// Coefficient of variation (std/mean) over the plateau.
    pub plateau_cv: f64,
}

/// Runs one algorithm over the stream and records wall-clock latency per
/// message. The stream must be longer than the window so a plateau exists.
pub fn benchmark_clustering(
    items: &[Item],
    cfg: &ClusteringConfig,
    algorithm: Algorithm,
) -> Result<BenchResult> {
    cfg.validate()?;
    if items.len() <= cfg.window_size {
        return Err(Error::InvalidInput(format!(
            "benchmark stream length {} must exceed the window size {}",
            items.len(),
            cfg.window_size
        )));
    }

    let mut samples = Vec::with_capacity(items.len());
    let mut plateau_start: Option<usize> = None;
    let note_window = |window_len: usize, samples_len: usize, start: &mut Option<usize>| {
        if start.is_none() && window_len >= cfg.window_size {
            *start = Some(samples_len);
        }
    };

    match algorithm {
        Algorithm::Online => {
            let mut clusterer = OnlineClusterer::new(*cfg)?;
            for item in items {
                let t0 = Instant::now();
                clusterer.step(item)?;
                let dt = t0.elapsed().as_secs_f64();
                samples.push(LatencySample {
                    messages_clustered: samples.len() + 1,
                    seconds: dt,
                });
                note_window(clusterer.window_len(), samples.len(), &mut plateau_start);
            }
        }
        Algorithm::MiniBatch => {
            let mut clusterer = MiniBatchClusterer::new(*cfg)?;
            let mut t0 = Instant::now();
            for item in items {
                if clusterer.pending() == 0 {
                    t0 = Instant::now();
                }
                if let Some(batch) = clusterer.push(item)? {
                    let per_message = t0.elapsed().as_secs_f64() / batch.len() as f64;
                    for _ in 0..batch.len() {
                        samples.push(LatencySample {
                            messages_clustered: samples.len() + 1,
                            seconds: per_message,
                        });
                    }
                    note_window(clusterer.window_len(), samples.len(), &mut plateau_start);
                }
            }
            let t0 = Instant::now();
            let tail = clusterer.flush_partial();
            if !tail.is_empty() {
                let per_message = t0.elapsed().as_secs_f64() / tail.len() as f64;
                for _ in 0..tail.len() {
                    samples.push(LatencySample {
                        messages_clustered: samples.len() + 1,
                        seconds: per_message,
                    });
                }
                note_window(clusterer.window_len(), samples.len(), &mut plateau_start);
            }
        }
    }

    let (plateau_mean, plateau_cv) = match plateau_start {
        Some(start) if start < samples.len() => plateau_stats(&samples[start..]),
        _ => (0.0, 0.0),
    };
    Ok(BenchResult {
        algorithm,
        samples,
        plateau_start,
        plateau_mean,
        plateau_cv,
    })
}

fn plateau_stats(samples: &[LatencySample]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.seconds).sum::<f64>() / n;
    if mean == 0.0 {
        return (0.0, 0.0);
    }
    let variance = samples
        .iter()
        .map(|s| (s.seconds - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean, variance.sqrt() / mean)
}

/// Writes the two-column series `messages_clustered <TAB> seconds`.
pub fn write_latency_series(path: &Path, result: &BenchResult) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "messages_clustered\tper_message_seconds").map_err(|e| Error::io(path, e))?;
    for sample in &result.samples {
        writeln!(out, "{}\t{:.9}", sample.messages_clustered, sample.seconds)
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
