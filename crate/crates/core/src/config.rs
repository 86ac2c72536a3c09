//! Flat key-value pipeline configuration.
//!
//! One configuration file governs every tunable. Keys use dotted section
//! names (`clustering.threshold = 0.23`); `#` starts a comment line and
//! blank lines are ignored. Every key can also be set programmatically
//! through [`PipelineConfig::set`], which is what command-line overrides
//! go through — the same dotted name, flag wins over file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::classifier::TrainingConfig;
use crate::clustering::{Algorithm, ClusteringConfig};
use crate::corpus::{CorpusFormat, SyntheticConfig};
use crate::error::{Error, Result};
use crate::evaluation::DetectionCriterion;
use crate::ranking::RankingConfig;

/// Which vectorizer turns token sequences into feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorizerKind {
    Average,
    IdfWeighted,
}

impl FromStr for VectorizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "avg" | "average" => Ok(VectorizerKind::Average),
            "idf" | "idf_weighted" => Ok(VectorizerKind::IdfWeighted),
            other => Err(Error::InvalidInput(format!(
                "unknown vectorizer `{other}` (expected avg or idf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

/// Replacement tokens used by both preprocessing profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessSettings {
    pub mention_token: String,
    pub url_token: String,
    pub number_token: String,
}

impl Default for PreprocessSettings {
    fn default() -> Self {
        Self {
            mention_token: "MENTION".into(),
            url_token: "URL".into(),
            number_token: "NUMBER".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSettings {
    pub hidden_layers: Vec<usize>,
    pub dropout_rate: f64,
    /// Confidence at or above which a prediction is labeled news.
    pub decision_threshold: f64,
    /// Confidence required for a message to continue into clustering.
    pub keep_threshold: f64,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        Self {
            hidden_layers: vec![400, 400, 200, 100],
            dropout_rate: 0.5,
            decision_threshold: 0.5,
            keep_threshold: 0.5,
        }
    }
}

/// Split shape; the per-split seed comes from the master seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSettings {
    pub test_fraction: f64,
    pub min_event_size: usize,
    pub max_event_size: usize,
}

impl Default for SplitSettings {
    fn default() -> Self {
        Self {
            test_fraction: 0.30,
            min_event_size: 10,
            max_event_size: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSettings {
    pub n_splits: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self { n_splits: 20 }
    }
}

/// Live-detection overrides: the stream window is larger than the
/// evaluation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectSettings {
    pub window_size: usize,
}

impl Default for DetectSettings {
    fn default() -> Self {
        Self { window_size: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub algorithms: Vec<Algorithm>,
    pub thresholds: Vec<f64>,
    pub batch_sizes: Vec<usize>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            algorithms: vec![Algorithm::Online, Algorithm::MiniBatch],
            thresholds: vec![0.05, 0.15, 0.20, 0.23, 0.25, 0.35],
            batch_sizes: vec![50],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSettings {
    pub messages: usize,
    pub window_size: usize,
    pub batch_size: usize,
    pub dim: usize,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            messages: 30_000,
            window_size: 10_000,
            batch_size: 50,
            dim: 32,
        }
    }
}

/// Every tunable of the pipeline, with defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub corpus_format: Option<CorpusFormat>,
    pub sport_events: BTreeSet<String>,
    pub vectorizer: VectorizerKind,
    pub preprocess: PreprocessSettings,
    pub classifier: ClassifierSettings,
    pub training: TrainingConfig,
    pub clustering: ClusteringConfig,
    pub algorithm: Algorithm,
    pub detect: DetectSettings,
    pub ranking: RankingConfig,
    pub detection: DetectionCriterion,
    pub split: SplitSettings,
    pub eval: EvalSettings,
    pub sweep: SweepSettings,
    pub bench: BenchSettings,
    pub synth: SyntheticConfig,
    /// Master seed; all component randomness derives from it.
    pub seed: u64,
    /// Split-level parallelism for the evaluation protocol.
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            corpus_format: None,
            sport_events: BTreeSet::new(),
            vectorizer: VectorizerKind::Average,
            preprocess: PreprocessSettings::default(),
            classifier: ClassifierSettings::default(),
            training: TrainingConfig::default(),
            clustering: ClusteringConfig::default(),
            algorithm: Algorithm::MiniBatch,
            detect: DetectSettings::default(),
            ranking: RankingConfig::default(),
            detection: DetectionCriterion::default(),
            split: SplitSettings::default(),
            eval: EvalSettings::default(),
            sweep: SweepSettings::default(),
            bench: BenchSettings::default(),
            synth: SyntheticConfig::default(),
            seed: 0,
            jobs: 1,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse::<T>().map_err(|_| Error::InvalidConfigValue {
        key: key.to_string(),
        reason: format!("cannot parse `{value}`"),
    })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value::<T>(key, s))
        .collect()
}

impl PipelineConfig {
    /// Defaults overlaid with the given file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_file(path)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (line_no, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(Error::Format(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    line_no + 1
                )));
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Sets one dotted key. Unknown keys and unparseable values error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse_value(key, value)?,
            "jobs" => {
                self.jobs = parse_value(key, value)?;
                if self.jobs == 0 {
                    return Err(Error::InvalidConfigValue {
                        key: key.into(),
                        reason: "jobs must be >= 1".into(),
                    });
                }
            }

            "paths.corpus" => self.paths.corpus = Some(PathBuf::from(value)),
            "paths.embeddings" => self.paths.embeddings = Some(PathBuf::from(value)),
            "paths.stopwords" => self.paths.stopwords = Some(PathBuf::from(value)),
            "paths.model" => self.paths.model = Some(PathBuf::from(value)),

            "corpus.format" => self.corpus_format = Some(parse_value(key, value)?),
            "corpus.sport_events" => {
                self.sport_events = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect()
            }

            "embedding.vectorizer" => self.vectorizer = parse_value(key, value)?,

            "preprocess.mention_token" => self.preprocess.mention_token = value.to_string(),
            "preprocess.url_token" => self.preprocess.url_token = value.to_string(),
            "preprocess.number_token" => self.preprocess.number_token = value.to_string(),

            "classifier.hidden" => self.classifier.hidden_layers = parse_list(key, value)?,
            "classifier.dropout" => self.classifier.dropout_rate = parse_value(key, value)?,
            "classifier.decision_threshold" => {
                self.classifier.decision_threshold = parse_value(key, value)?
            }
            "classifier.keep_threshold" => {
                self.classifier.keep_threshold = parse_value(key, value)?
            }

            "training.learning_rate" => self.training.learning_rate = parse_value(key, value)?,
            "training.momentum" => self.training.momentum = parse_value(key, value)?,
            "training.batch_size" => self.training.batch_size = parse_value(key, value)?,
            "training.max_epochs" => self.training.max_epochs = parse_value(key, value)?,
            "training.patience" => self.training.patience = parse_value(key, value)?,
            "training.validation_fraction" => {
                self.training.validation_fraction = parse_value(key, value)?
            }

            "clustering.algorithm" => self.algorithm = parse_value(key, value)?,
            "clustering.threshold" => self.clustering.threshold = parse_value(key, value)?,
            "clustering.window" => self.clustering.window_size = parse_value(key, value)?,
            "clustering.batch" => self.clustering.batch_size = parse_value(key, value)?,
            "clustering.duplicate_epsilon" => {
                self.clustering.duplicate_epsilon = parse_value(key, value)?
            }

            "detect.window" => self.detect.window_size = parse_value(key, value)?,

            "ranking.top_k_size" => self.ranking.top_k_size = parse_value(key, value)?,
            "ranking.top_k_growth" => self.ranking.top_k_growth = parse_value(key, value)?,
            "ranking.min_size" => self.ranking.min_size = parse_value(key, value)?,
            "ranking.min_mean_confidence" => {
                self.ranking.min_mean_confidence = parse_value(key, value)?
            }
            "ranking.recency_window" => self.ranking.recency_window = parse_value(key, value)?,
            "ranking.min_unique_author_ratio" => {
                self.ranking.min_unique_author_ratio = parse_value(key, value)?
            }
            "ranking.min_entropy" => self.ranking.min_entropy = parse_value(key, value)?,
            "ranking.final_k" => self.ranking.final_k = parse_value(key, value)?,
            "ranking.growth_horizon" => self.ranking.growth_horizon = parse_value(key, value)?,

            "detection.min_candidate_size" => {
                self.detection.min_candidate_size = parse_value(key, value)?
            }
            "detection.min_purity" => self.detection.min_purity = parse_value(key, value)?,

            "split.test_fraction" => self.split.test_fraction = parse_value(key, value)?,
            "split.min_event_size" => self.split.min_event_size = parse_value(key, value)?,
            "split.max_event_size" => self.split.max_event_size = parse_value(key, value)?,

            "eval.splits" => self.eval.n_splits = parse_value(key, value)?,

            "sweep.algorithms" => self.sweep.algorithms = parse_list(key, value)?,
            "sweep.thresholds" => self.sweep.thresholds = parse_list(key, value)?,
            "sweep.batch_sizes" => self.sweep.batch_sizes = parse_list(key, value)?,

            "bench.messages" => self.bench.messages = parse_value(key, value)?,
            "bench.window" => self.bench.window_size = parse_value(key, value)?,
            "bench.batch" => self.bench.batch_size = parse_value(key, value)?,
            "bench.dim" => self.bench.dim = parse_value(key, value)?,

            "synth.events" => self.synth.num_events = parse_value(key, value)?,
            "synth.messages_per_event" => {
                self.synth.messages_per_event = parse_value(key, value)?
            }
            "synth.event_vocab" => self.synth.event_vocab_size = parse_value(key, value)?,
            "synth.noise_messages" => self.synth.noise_messages = parse_value(key, value)?,
            "synth.noise_vocab" => self.synth.noise_vocab_size = parse_value(key, value)?,
            "synth.tokens_per_message" => {
                self.synth.tokens_per_message = parse_value(key, value)?
            }
            "synth.stopword_fraction" => self.synth.stopword_fraction = parse_value(key, value)?,
            "synth.time_span" => self.synth.time_span = parse_value(key, value)?,
            "synth.authors" => self.synth.num_authors = parse_value(key, value)?,
            "synth.dim" => self.synth.embedding_dim = parse_value(key, value)?,
            "synth.jitter" => self.synth.token_jitter = parse_value(key, value)?,

            other => return Err(Error::UnknownConfigKey(other.to_string())),
        }
        Ok(())
    }

    /// The classification-mode preprocessing profile under this config.
    pub fn classification_profile(&self) -> crate::embedding::PreprocessProfile {
        let mut profile = crate::embedding::PreprocessProfile::classification();
        profile.mention_token = self.preprocess.mention_token.clone();
        profile.url_token = self.preprocess.url_token.clone();
        profile.number_token = self.preprocess.number_token.clone();
        profile
    }

    /// The clustering-mode preprocessing profile under this config.
    pub fn clustering_profile(
        &self,
        stopwords: std::collections::HashSet<String>,
    ) -> crate::embedding::PreprocessProfile {
        let mut profile = crate::embedding::PreprocessProfile::clustering(stopwords);
        profile.mention_token = self.preprocess.mention_token.clone();
        profile.url_token = self.preprocess.url_token.clone();
        profile.number_token = self.preprocess.number_token.clone();
        profile
    }
}
