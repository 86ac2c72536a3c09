//! Command-line front end for the news-event detection pipeline.
//!
//! Every tunable lives in one flat key-value config file and can be
//! overridden with a flag of the same dotted name, e.g.
//! `--clustering.threshold 0.25`. See `newsthread help` for the commands.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use newsthread::classifier::{self, Class, NetworkArchitecture};
use newsthread::clustering::{
    benchmark_clustering, write_assignment_log, write_latency_series, Algorithm,
    ClusteringConfig, Item, StreamClusterer,
};
use newsthread::config::{PipelineConfig, VectorizerKind};
use newsthread::corpus::{
    generate_synthetic, load_corpus, synthetic_embedding_table, write_corpus, Corpus,
    CorpusFormat, Label,
};
use newsthread::embedding::{
    avg_vector, compute_idf, default_stopwords, idf_weighted_vector, load_embeddings,
    load_stopwords, preprocess, write_embeddings, EmbeddingTable, FeatureVector, IdfTable,
};
use newsthread::evaluation::{
    render_metrics_jsonl, render_metrics_table, render_sweep_table, run_protocol,
    threshold_sweep, SweepSpec,
};
use newsthread::ranking::{select_candidates, write_candidate_report};
use newsthread::seed;

const USAGE: &str = "\
usage: newsthread <command> [options]

commands:
  synth      generate a synthetic labeled corpus plus its embedding table
  train      train the news classifier and save the model
  detect     replay a stream: classify, cluster, rank candidate events
  evaluate   run the seeded multi-split protocol and report metrics
  sweep      grid over thresholds/algorithms/preprocessing, report V-measure
  bench      measure per-message clustering latency for both algorithms
  help       print this message

options:
  --config <path>   flat key-value configuration file
  --out <dir>       output directory (default: out)
  --input <path>    input stream for `detect` (overrides paths.corpus)
  --seed <int>      master seed (same as the `seed` config key)
  --jobs <int>      split-level parallelism (same as the `jobs` config key)
  --<key> <value>   override any config key by its dotted name,
                    e.g. --clustering.threshold 0.25
";

struct Invocation {
    command: String,
    cfg: PipelineConfig,
    out_dir: PathBuf,
    input: Option<PathBuf>,
}

fn parse_args(args: &[String]) -> Result<Invocation> {
    let mut command = None;
    let mut config_path: Option<PathBuf> = None;
    let mut out_dir = PathBuf::from("out");
    let mut input = None;
    let mut overrides: Vec<(String, String)> = Vec::new();

    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        if let Some(flag) = arg.strip_prefix("--") {
            let value = iter
                .next()
                .ok_or_else(|| anyhow!("flag --{flag} expects a value"))?;
            match flag {
                "config" => config_path = Some(PathBuf::from(value)),
                "out" => out_dir = PathBuf::from(value),
                "input" => input = Some(PathBuf::from(value)),
                key if key == "seed" || key == "jobs" || key.contains('.') => {
                    overrides.push((key.to_string(), value.clone()));
                }
                other => bail!("unknown flag --{other}"),
            }
        } else if command.is_none() {
            command = Some(arg.clone());
        } else {
            bail!("unexpected argument `{arg}`");
        }
    }

    let command = command.ok_or_else(|| anyhow!("missing command; try `newsthread help`"))?;
    let mut cfg = PipelineConfig::default();
    if let Some(path) = config_path {
        cfg.apply_file(&path)
            .with_context(|| format!("loading config {}", path.display()))?;
    }
    for (key, value) in overrides {
        cfg.set(&key, &value)?;
    }
    Ok(Invocation {
        command,
        cfg,
        out_dir,
        input,
    })
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "help" || a == "--help" || a == "-h") {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: &[String]) -> Result<()> {
    let invocation = parse_args(args)?;
    let command = match invocation.command.as_str() {
        "synth" => cmd_synth,
        "train" => cmd_train,
        "detect" => cmd_detect,
        "evaluate" => cmd_evaluate,
        "sweep" => cmd_sweep,
        "bench" => cmd_bench,
        other => bail!("unknown command `{other}`; try `newsthread help`"),
    };
    std::fs::create_dir_all(&invocation.out_dir).with_context(|| {
        format!("creating output directory {}", invocation.out_dir.display())
    })?;
    command(&invocation)
}

/// Loads the corpus (--input beats paths.corpus), applies the label
/// policy, and reports skipped lines.
fn load_input_corpus(invocation: &Invocation) -> Result<Corpus> {
    let path = invocation
        .input
        .clone()
        .or_else(|| invocation.cfg.paths.corpus.clone())
        .ok_or_else(|| anyhow!("no corpus path (set paths.corpus or --input)"))?;
    let format = invocation
        .cfg
        .corpus_format
        .unwrap_or_else(|| CorpusFormat::from_path(&path));
    let load = load_corpus(&path, format)?;
    if load.skipped > 0 {
        eprintln!("note: skipped {} malformed corpus line(s)", load.skipped);
    }
    Ok(load.corpus.apply_label_policy(&invocation.cfg.sport_events))
}

fn load_table(cfg: &PipelineConfig) -> Result<EmbeddingTable> {
    let path = cfg
        .paths
        .embeddings
        .as_ref()
        .ok_or_else(|| anyhow!("no embedding table path (set paths.embeddings)"))?;
    let load = load_embeddings(path)?;
    if load.duplicates > 0 {
        eprintln!(
            "note: embedding table had {} duplicate token(s); last occurrence wins",
            load.duplicates
        );
    }
    Ok(load.table)
}

fn load_stopword_set(cfg: &PipelineConfig) -> Result<HashSet<String>> {
    match &cfg.paths.stopwords {
        Some(path) => Ok(load_stopwords(path)?),
        None => Ok(default_stopwords()),
    }
}

fn model_path(invocation: &Invocation) -> PathBuf {
    invocation
        .cfg
        .paths
        .model
        .clone()
        .unwrap_or_else(|| invocation.out_dir.join("model.bin"))
}

enum Vectorizer<'a> {
    Average(&'a EmbeddingTable),
    Idf(&'a EmbeddingTable, IdfTable),
}

impl Vectorizer<'_> {
    fn new<'a>(
        kind: VectorizerKind,
        table: &'a EmbeddingTable,
        train_documents: &[Vec<String>],
    ) -> Result<Vectorizer<'a>> {
        Ok(match kind {
            VectorizerKind::Average => Vectorizer::Average(table),
            VectorizerKind::IdfWeighted => {
                Vectorizer::Idf(table, compute_idf(train_documents)?)
            }
        })
    }

    fn vectorize(&self, tokens: &[String]) -> FeatureVector {
        match self {
            Vectorizer::Average(table) => avg_vector(tokens, table),
            Vectorizer::Idf(table, idf) => idf_weighted_vector(tokens, table, idf),
        }
    }
}

fn cmd_synth(invocation: &Invocation) -> Result<()> {
    let mut synth = invocation.cfg.synth.clone();
    synth.seed = seed::derive(invocation.cfg.seed, "synth");
    let corpus = generate_synthetic(&synth)?;
    let table = synthetic_embedding_table(&synth)?;

    let corpus_path = invocation.out_dir.join("synthetic.jsonl");
    let table_path = invocation.out_dir.join("synthetic_embeddings.txt");
    write_corpus(&corpus_path, &corpus, CorpusFormat::Jsonl)?;
    write_embeddings(&table_path, &table)?;

    println!(
        "synthetic corpus: {} messages ({} events), {}",
        corpus.len(),
        corpus.event_sizes().len(),
        corpus_path.display()
    );
    println!(
        "embedding table: {} tokens, dimension {}, {}",
        table.len(),
        table.dimension(),
        table_path.display()
    );
    Ok(())
}

fn cmd_train(invocation: &Invocation) -> Result<()> {
    let cfg = &invocation.cfg;
    let corpus = load_input_corpus(invocation)?;
    let table = load_table(cfg)?;

    let classification = cfg.classification_profile();
    let documents: Vec<Vec<String>> = corpus
        .messages()
        .iter()
        .map(|m| preprocess(&m.text, &classification))
        .collect();
    let vectorizer = Vectorizer::new(cfg.vectorizer, &table, &documents)?;
    let features: Vec<(FeatureVector, Class)> = corpus
        .messages()
        .iter()
        .zip(&documents)
        .map(|(m, tokens)| {
            let class = match corpus.label(&m.id) {
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
        seed: seed::derive(cfg.seed, "train"),
        ..cfg.training
    };
    let mut model = classifier::train(&features, &arch, &training)?;
    model.decision_threshold = cfg.classifier.decision_threshold;

    let path = model_path(invocation);
    classifier::save_model(&path, &model)?;
    println!(
        "trained on {} examples: validation_accuracy={:.6} epochs={} model={}",
        features.len(),
        model.summary.final_validation_accuracy,
        model.summary.epochs_run,
        path.display()
    );
    Ok(())
}

fn cmd_detect(invocation: &Invocation) -> Result<()> {
    let cfg = &invocation.cfg;
    cfg.ranking.validate()?;
    let corpus = load_input_corpus(invocation)?;
    let table = load_table(cfg)?;
    let stopwords = load_stopword_set(cfg)?;
    let model = classifier::load_model(&model_path(invocation))?;
    if model.input_dim() != table.dimension() {
        bail!(
            "model expects dimension {} but the embedding table has {}",
            model.input_dim(),
            table.dimension()
        );
    }

    let classification = cfg.classification_profile();
    let clustering_profile = cfg.clustering_profile(stopwords);
    // Live detection uses the larger stream window.
    let clustering = ClusteringConfig {
        window_size: cfg.detect.window_size,
        ..cfg.clustering
    };
    let mut clusterer = StreamClusterer::new(cfg.algorithm, clustering)?;

    let mut assignments = Vec::new();
    let mut kept = 0usize;
    let mut now = 0i64;
    for message in corpus.replay() {
        now = now.max(message.timestamp);
        let class_tokens = preprocess(&message.text, &classification);
        let prediction = model.predict(&avg_vector(&class_tokens, &table))?;
        if prediction.confidence < cfg.classifier.keep_threshold {
            continue;
        }
        kept += 1;
        let tokens = preprocess(&message.text, &clustering_profile);
        let vector = avg_vector(&tokens, &table);
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

    let threads = clusterer.threads();
    let candidates = select_candidates(&threads, &cfg.ranking, now);

    let candidates_path = invocation.out_dir.join("candidates.tsv");
    let assignments_path = invocation.out_dir.join("assignments.tsv");
    write_candidate_report(&candidates_path, &candidates)?;
    write_assignment_log(&assignments_path, &assignments)?;

    println!(
        "stream: {} messages, {} kept as news, {} threads",
        corpus.len(),
        kept,
        threads.len()
    );
    println!(
        "candidates: {} selected, report {}",
        candidates.len(),
        candidates_path.display()
    );
    Ok(())
}

fn cmd_evaluate(invocation: &Invocation) -> Result<()> {
    let cfg = &invocation.cfg;
    let corpus = load_input_corpus(invocation)?;
    let table = load_table(cfg)?;
    let stopwords = load_stopword_set(cfg)?;

    let result = run_protocol(&corpus, &table, &stopwords, cfg)?;

    let table_path = invocation.out_dir.join("metrics.tsv");
    let jsonl_path = invocation.out_dir.join("metrics.jsonl");
    std::fs::write(&table_path, render_metrics_table(&result))
        .with_context(|| format!("writing {}", table_path.display()))?;
    std::fs::write(&jsonl_path, render_metrics_jsonl(&result))
        .with_context(|| format!("writing {}", jsonl_path.display()))?;

    println!(
        "splits={} mean: P={:.6} R={:.6} F1={:.6} H={:.6} C={:.6} V={:.6}",
        result.splits.len(),
        result.mean.precision,
        result.mean.recall,
        result.mean.f1,
        result.mean.homogeneity,
        result.mean.completeness,
        result.mean.v_measure
    );
    println!("reports: {} {}", table_path.display(), jsonl_path.display());
    Ok(())
}

fn cmd_sweep(invocation: &Invocation) -> Result<()> {
    let cfg = &invocation.cfg;
    let corpus = load_input_corpus(invocation)?;
    let table = load_table(cfg)?;
    let stopwords = load_stopword_set(cfg)?;

    let spec = SweepSpec::from_config(cfg);
    let rows = threshold_sweep(&corpus, &table, &stopwords, cfg, &spec)?;
    let path = invocation.out_dir.join("sweep.tsv");
    std::fs::write(&path, render_sweep_table(&rows))
        .with_context(|| format!("writing {}", path.display()))?;

    let best = rows
        .iter()
        .max_by(|a, b| {
            a.metrics
                .v_measure
                .partial_cmp(&b.metrics.v_measure)
                .expect("metrics are finite")
        })
        .expect("sweep produced rows");
    println!(
        "best cell: algorithm={} batch={} stopwords={} t={:.2} V={:.6}",
        best.algorithm,
        best.batch_size.map(|b| b.to_string()).unwrap_or_else(|| "-".into()),
        if best.stopwords_removed { "removed" } else { "kept" },
        best.threshold,
        best.metrics.v_measure
    );
    println!("table: {}", path.display());
    Ok(())
}

fn cmd_bench(invocation: &Invocation) -> Result<()> {
    let cfg = &invocation.cfg;
    let bench = &cfg.bench;
    let clustering = ClusteringConfig {
        window_size: bench.window_size,
        batch_size: bench.batch_size,
        ..cfg.clustering
    };

    // Self-contained random stream: worst-case scan cost, since nearly
    // every message opens its own thread.
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, "bench"));
    let items: Vec<Item> = (0..bench.messages)
        .map(|i| {
            let values: Vec<f64> = (0..bench.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            Item::bare(format!("m{i}"), FeatureVector::new(values))
        })
        .collect();

    let mut plateau_means = BTreeMap::new();
    for algorithm in [Algorithm::Online, Algorithm::MiniBatch] {
        let result = benchmark_clustering(&items, &clustering, algorithm)?;
        let path = invocation
            .out_dir
            .join(format!("bench_{algorithm}.tsv"));
        write_latency_series(&path, &result)?;
        println!(
            "{algorithm}: plateau mean {:.3} us/message (cv {:.3}), series {}",
            result.plateau_mean * 1e6,
            result.plateau_cv,
            path.display()
        );
        plateau_means.insert(algorithm.to_string(), result.plateau_mean);
    }
    let online = plateau_means["online"];
    let minibatch = plateau_means["minibatch"];
    if minibatch > 0.0 {
        println!("speedup: online/minibatch = {:.2}", online / minibatch);
    }
    Ok(())
}
