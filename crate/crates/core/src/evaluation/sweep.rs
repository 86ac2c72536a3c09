//! Threshold sweep over the clustering grid.
//!
//! Feeds the labeled news-only stream (ground-truth event messages, no
//! classifier) through every combination of preprocessing profile,
//! algorithm, batch size, and threshold, scoring each run with the
//! clustering metrics. This is the harness for picking the distance
//! threshold and for the stopword-removal ablation.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::clustering::{Algorithm, ClusteringConfig, Item, StreamClusterer};
use crate::config::PipelineConfig;
use crate::corpus::Corpus;
use crate::embedding::{avg_vector, preprocess, EmbeddingTable};
use crate::error::{Error, Result};

use super::{cluster_metrics, ClusterMetrics};

/// Grid specification for one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub algorithms: Vec<Algorithm>,
    pub thresholds: Vec<f64>,
    /// Batch sizes tried for the mini-batch algorithm.
    pub batch_sizes: Vec<usize>,
    pub window_size: usize,
    pub duplicate_epsilon: f64,
}

impl SweepSpec {
    pub fn from_config(cfg: &PipelineConfig) -> Self {
        Self {
            algorithms: cfg.sweep.algorithms.clone(),
            thresholds: cfg.sweep.thresholds.clone(),
            batch_sizes: cfg.sweep.batch_sizes.clone(),
            window_size: cfg.clustering.window_size,
            duplicate_epsilon: cfg.clustering.duplicate_epsilon,
        }
    }
}

/// One grid cell's scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    /// `None` for the online algorithm.
    pub batch_size: Option<usize>,
    pub stopwords_removed: bool,
    pub threshold: f64,
    pub metrics: ClusterMetrics,
}

/// Runs the grid. The corpus must carry event labels; only event messages
/// enter the stream, mirroring a perfectly filtered classifier stage.
pub fn threshold_sweep(
    corpus: &Corpus,
    table: &EmbeddingTable,
    stopwords: &HashSet<String>,
    cfg: &PipelineConfig,
    spec: &SweepSpec,
) -> Result<Vec<SweepRow>> {
    if spec.thresholds.is_empty() || spec.algorithms.is_empty() {
        return Err(Error::InvalidInput(
            "sweep needs at least one threshold and one algorithm".into(),
        ));
    }

    let news: Vec<(&str, &str, i64, String)> = corpus
        .messages()
        .iter()
        .filter_map(|m| {
            corpus
                .label(&m.id)
                .and_then(|l| l.event_id())
                .map(|e| (m.id.as_str(), e, m.timestamp, m.text.clone()))
        })
        .collect();
    if news.is_empty() {
        return Err(Error::InvalidInput(
            "sweep corpus has no ground-truth event messages".into(),
        ));
    }
    let truth: BTreeMap<String, String> = news
        .iter()
        .map(|(id, event, ..)| (id.to_string(), event.to_string()))
        .collect();

    let mut rows = Vec::new();
    for stopwords_removed in [false, true] {
        let profile = if stopwords_removed {
            cfg.clustering_profile(stopwords.clone())
        } else {
            cfg.classification_profile()
        };
        // Vectors are fixed per profile; reuse them across the grid.
        let items: Vec<Item> = news
            .iter()
            .map(|(id, _, timestamp, text)| {
                let tokens = preprocess(text, &profile);
                let vector = avg_vector(&tokens, table);
                Item {
                    message_id: id.to_string(),
                    author_id: String::new(),
                    timestamp: *timestamp,
                    confidence: 1.0,
                    tokens: Vec::new(),
                    vector,
                }
            })
            .collect();

        for &algorithm in &spec.algorithms {
            let batches: Vec<Option<usize>> = match algorithm {
                Algorithm::Online => vec![None],
                Algorithm::MiniBatch => spec.batch_sizes.iter().map(|&b| Some(b)).collect(),
            };
            for batch_size in batches {
                for &threshold in &spec.thresholds {
                    let clustering = ClusteringConfig {
                        threshold,
                        window_size: spec.window_size,
                        batch_size: batch_size.unwrap_or(1),
                        duplicate_epsilon: spec.duplicate_epsilon,
                    };
                    let metrics = run_cell(&items, &truth, algorithm, clustering)?;
                    rows.push(SweepRow {
                        algorithm,
                        batch_size,
                        stopwords_removed,
                        threshold,
                        metrics,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn run_cell(
    items: &[Item],
    truth: &BTreeMap<String, String>,
    algorithm: Algorithm,
    clustering: ClusteringConfig,
) -> Result<ClusterMetrics> {
    let mut clusterer = StreamClusterer::new(algorithm, clustering)?;
    let mut assignments = Vec::new();
    for item in items {
        assignments.extend(clusterer.push(item)?);
    }
    assignments.extend(clusterer.finish());

    let mut scored_clusters = BTreeMap::new();
    let mut scored_truth = BTreeMap::new();
    for assignment in &assignments {
        if let Some(thread) = assignment.outcome.thread_id() {
            scored_clusters.insert(assignment.message_id.clone(), thread);
            scored_truth.insert(
                assignment.message_id.clone(),
                truth[&assignment.message_id].clone(),
            );
        }
    }
    if scored_clusters.is_empty() {
        return Ok(ClusterMetrics::zero());
    }
    cluster_metrics(&scored_clusters, &scored_truth)
}

/// Delimited long-form table, one grid cell per row.
pub fn render_sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str("algorithm\tbatch\tstopwords\tthreshold\thomogeneity\tcompleteness\tv_measure\n");
    for row in rows {
        let batch = row
            .batch_size
            .map(|b| b.to_string())
            .unwrap_or_else(|| "-".into());
        let stopwords = if row.stopwords_removed { "removed" } else { "kept" };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.2}\t{:.6}\t{:.6}\t{:.6}",
            row.algorithm,
            batch,
            stopwords,
            row.threshold,
            row.metrics.homogeneity,
            row.metrics.completeness,
            row.metrics.v_measure
        );
    }
    out
}
