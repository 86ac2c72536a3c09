//! The seeded multi-split experimental protocol.
//!
//! Each split draws its own train/test partition, trains the classifier on
//! the train side, replays the test side through classify → cluster, and
//! scores detection quality against the test-side ground truth plus
//! clustering quality over the ground-truth event messages that were
//! clustered. Results are reported per split and aggregated as mean and
//! (population) standard deviation. Everything derives from the master
//! seed, so a rerun is byte-identical.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::classifier::{self, Class, NetworkArchitecture};
use crate::clustering::{Item, StreamClusterer};
use crate::config::{PipelineConfig, VectorizerKind};
use crate::corpus::{Corpus, Label, SplitSpec};
use crate::embedding::{
    avg_vector, compute_idf, idf_weighted_vector, preprocess, EmbeddingTable, FeatureVector,
    IdfTable,
};
use crate::error::{Error, Result};
use crate::seed;

use super::{cluster_metrics, match_detections, CandidateCluster, ClusterMetrics, DetectionMetrics};

/// Per-split scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    pub split: usize,
    pub detection: DetectionMetrics,
    pub clusters: ClusterMetrics,
}

/// Mean or spread of the six headline metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub splits: Vec<SplitOutcome>,
    pub mean: MetricSummary,
    pub std_dev: MetricSummary,
}

/// Vectorizes token sequences consistently across the protocol.
struct Vectorizer<'a> {
    table: &'a EmbeddingTable,
    idf: Option<IdfTable>,
}

impl<'a> Vectorizer<'a> {
    fn new(
        kind: VectorizerKind,
        table: &'a EmbeddingTable,
        train_documents: &[Vec<String>],
    ) -> Result<Self> {
        let idf = match kind {
            VectorizerKind::Average => None,
            VectorizerKind::IdfWeighted => Some(compute_idf(train_documents)?),
        };
        Ok(Self { table, idf })
    }

    fn vectorize(&self, tokens: &[String]) -> FeatureVector {
        match &self.idf {
            None => avg_vector(tokens, self.table),
            Some(idf) => idf_weighted_vector(tokens, self.table, idf),
        }
    }
}

/// Runs the full protocol over `cfg.eval.n_splits` seeded splits.
///
/// The corpus must already be label-normalized (every message labeled).
/// Splits run in parallel when `cfg.jobs > 1`; outputs are ordered by
/// split index either way.
pub fn run_protocol(
    corpus: &Corpus,
    table: &EmbeddingTable,
    stopwords: &HashSet<String>,
    cfg: &PipelineConfig,
) -> Result<ProtocolResult> {
    if cfg.eval.n_splits == 0 {
        return Err(Error::InvalidInput("eval.splits must be >= 1".into()));
    }
    cfg.detection.validate()?;
    let indices: Vec<usize> = (0..cfg.eval.n_splits).collect();
    let splits: Vec<SplitOutcome> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot build thread pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            indices
                .par_iter()
                .map(|&i| run_split(i, corpus, table, stopwords, cfg))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        indices
            .iter()
            .map(|&i| run_split(i, corpus, table, stopwords, cfg))
            .collect::<Result<Vec<_>>>()?
    };

    let mean = summarize(&splits, |values, _| mean_of(values));
    let std_dev = summarize(&splits, std_of);
    Ok(ProtocolResult {
        splits,
        mean,
        std_dev,
    })
}

fn run_split(
    index: usize,
    corpus: &Corpus,
    table: &EmbeddingTable,
    stopwords: &HashSet<String>,
    cfg: &PipelineConfig,
) -> Result<SplitOutcome> {
    let spec = SplitSpec {
        seed: seed::derive(cfg.seed, &format!("split:{index}")),
        test_fraction: cfg.split.test_fraction,
        min_event_size: cfg.split.min_event_size,
        max_event_size: cfg.split.max_event_size,
    };
    let (train, test) = crate::corpus::make_split(corpus, &spec)?;

    let classification = cfg.classification_profile();
    let clustering_profile = cfg.clustering_profile(stopwords.clone());

    // Train the news filter on the train side.
    let train_documents: Vec<Vec<String>> = train
        .messages()
        .iter()
        .map(|m| preprocess(&m.text, &classification))
        .collect();
    let vectorizer = Vectorizer::new(cfg.vectorizer, table, &train_documents)?;
    let features: Vec<(FeatureVector, Class)> = train
        .messages()
        .iter()
        .zip(&train_documents)
        .map(|(m, tokens)| {
            let class = match train.label(&m.id) {
                Some(Label::Event(_)) => Class::Event,
                _ => Class::NotEvent,
            };
            (vectorizer.vectorize(tokens), class)
        })
        .collect();
    let arch = NetworkArchitecture {
        input_dim: table.dimension(),
        hidden_layers: cfg.classifier.hidden_layers.clone(),
        dropout_rate: cfg.classifier.dropout_rate,
    };
    let training = classifier::TrainingConfig {
        seed: seed::derive(cfg.seed, &format!("train:{index}")),
        ..cfg.training
    };
    let mut model = classifier::train(&features, &arch, &training)?;
    model.decision_threshold = cfg.classifier.decision_threshold;

    // Replay the test side: classify, keep confident news, cluster.
    let mut clusterer = StreamClusterer::new(cfg.algorithm, cfg.clustering)?;
    let mut assignments = Vec::new();
    for message in test.replay() {
        let class_tokens = preprocess(&message.text, &classification);
        let feature = vectorizer.vectorize(&class_tokens);
        let prediction = model.predict(&feature)?;
        if prediction.confidence < cfg.classifier.keep_threshold {
            continue;
        }
        let tokens = preprocess(&message.text, &clustering_profile);
        let vector = vectorizer.vectorize(&tokens);
        let item = Item {
            message_id: message.id.clone(),
            author_id: message.author_id.clone(),
            timestamp: message.timestamp,
            confidence: prediction.confidence,
            tokens,
            vector,
        };
        assignments.extend(clusterer.push(&item)?);
    }
    assignments.extend(clusterer.finish());

    // Ground-truth event labels on the test side.
    let truth: BTreeMap<String, String> = test
        .labels()
        .iter()
        .filter_map(|(id, label)| label.event_id().map(|e| (id.clone(), e.to_string())))
        .collect();

    // Clustering quality over ground-truth event messages that were
    // clustered (duplicates and dropped messages are not scored).
    let mut scored_clusters = BTreeMap::new();
    let mut scored_truth = BTreeMap::new();
    for assignment in &assignments {
        if let (Some(thread), Some(event)) = (
            assignment.outcome.thread_id(),
            truth.get(&assignment.message_id),
        ) {
            scored_clusters.insert(assignment.message_id.clone(), thread);
            scored_truth.insert(assignment.message_id.clone(), event.clone());
        }
    }
    let clusters = if scored_clusters.is_empty() {
        ClusterMetrics::zero()
    } else {
        cluster_metrics(&scored_clusters, &scored_truth)?
    };

    // Detection quality: every thread at or above the candidate size.
    let candidates: Vec<CandidateCluster> = clusterer
        .threads()
        .iter()
        .filter(|t| t.size() >= cfg.detection.min_candidate_size)
        .map(CandidateCluster::from)
        .collect();
    let detection = match_detections(&candidates, &truth, &cfg.detection);

    Ok(SplitOutcome {
        split: index,
        detection,
        clusters,
    })
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn std_of(values: &[f64], mean: f64) -> f64 {
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

fn summarize(splits: &[SplitOutcome], fold: impl Fn(&[f64], f64) -> f64) -> MetricSummary {
    let collect = |f: &dyn Fn(&SplitOutcome) -> f64| -> f64 {
        let values: Vec<f64> = splits.iter().map(f).collect();
        let mean = mean_of(&values);
        fold(&values, mean)
    };
    MetricSummary {
        precision: collect(&|s| s.detection.precision),
        recall: collect(&|s| s.detection.recall),
        f1: collect(&|s| s.detection.f1),
        homogeneity: collect(&|s| s.clusters.homogeneity),
        completeness: collect(&|s| s.clusters.completeness),
        v_measure: collect(&|s| s.clusters.v_measure),
    }
}

/// Human-readable delimited table: one row per split, then mean and
/// standard-deviation rows.
pub fn render_metrics_table(result: &ProtocolResult) -> String {
    let mut out = String::new();
    out.push_str("split\tprecision\trecall\tf1\thomogeneity\tcompleteness\tv_measure\n");
    for s in &result.splits {
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            s.split,
            s.detection.precision,
            s.detection.recall,
            s.detection.f1,
            s.clusters.homogeneity,
            s.clusters.completeness,
            s.clusters.v_measure
        );
    }
    for (name, row) in [("mean", &result.mean), ("std", &result.std_dev)] {
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            name, row.precision, row.recall, row.f1, row.homogeneity, row.completeness,
            row.v_measure
        );
    }
    out
}

#[derive(Serialize)]
struct SplitRecord<'a> {
    split: usize,
    precision: f64,
    recall: f64,
    f1: f64,
    homogeneity: f64,
    completeness: f64,
    v_measure: f64,
    matched_candidates: usize,
    total_candidates: usize,
    detected_events: usize,
    total_events: usize,
    kind: &'a str,
}

/// Machine-readable line-delimited variant for CI assertions.
pub fn render_metrics_jsonl(result: &ProtocolResult) -> String {
    let mut out = String::new();
    for s in &result.splits {
        let record = SplitRecord {
            split: s.split,
            precision: s.detection.precision,
            recall: s.detection.recall,
            f1: s.detection.f1,
            homogeneity: s.clusters.homogeneity,
            completeness: s.clusters.completeness,
            v_measure: s.clusters.v_measure,
            matched_candidates: s.detection.matched_candidates,
            total_candidates: s.detection.total_candidates,
            detected_events: s.detection.detected_events,
            total_events: s.detection.total_events,
            kind: "split",
        };
        out.push_str(&serde_json::to_string(&record).expect("plain struct serializes"));
        out.push('\n');
    }
    for (kind, row) in [("mean", &result.mean), ("std", &result.std_dev)] {
        let mut value = serde_json::to_value(row).expect("plain struct serializes");
        value["kind"] = serde_json::Value::String(kind.to_string());
        out.push_str(&serde_json::to_string(&value).expect("json value serializes"));
        out.push('\n');
    }
    out
}
