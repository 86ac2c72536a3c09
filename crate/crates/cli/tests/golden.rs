//! Command-level tests: a pinned happy path, an empty-input failure, and a
//! bad-config failure for every subcommand, driven through the built
//! binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn newsthread(args: &[&str], extra_paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_newsthread"));
    cmd.args(args);
    for (flag, path) in extra_paths {
        cmd.arg(flag).arg(path);
    }
    cmd.output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_one_line_error(output: &Output, needle: &str) {
    assert!(!output.status.success(), "command unexpectedly succeeded");
    let stderr = stderr_of(output);
    assert!(
        stderr.starts_with("error: "),
        "diagnostic should start with `error:`, got {stderr:?}"
    );
    assert_eq!(stderr.trim_end().lines().count(), 1, "diagnostic must be one line");
    assert!(
        stderr.contains(needle),
        "diagnostic {stderr:?} missing {needle:?}"
    );
}

/// Small fixture corpus + table produced by `synth`.
struct Fixture {
    _dir: tempfile::TempDir,
    corpus: PathBuf,
    table: PathBuf,
    out: PathBuf,
}

fn fixture(seed: &str) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = newsthread(
        &[
            "synth",
            "--synth.events", "6",
            "--synth.messages_per_event", "20",
            "--synth.noise_messages", "120",
            "--synth.noise_vocab", "100",
            "--synth.dim", "16",
            "--seed", seed,
        ],
        &[("--out", &out)],
    );
    assert!(output.status.success(), "{}", stderr_of(&output));
    Fixture {
        corpus: out.join("synthetic.jsonl"),
        table: out.join("synthetic_embeddings.txt"),
        out,
        _dir: dir,
    }
}

fn small_training_args<'a>() -> Vec<&'a str> {
    vec![
        "--classifier.hidden", "16,8",
        "--classifier.dropout", "0.2",
        "--training.max_epochs", "80",
    ]
}

// ---------------------------------------------------------------- synth

#[test]
fn synth_happy_path_is_deterministic() {
    let a = fixture("9");
    let b = fixture("9");

    let corpus_a = std::fs::read(&a.corpus).unwrap();
    let corpus_b = std::fs::read(&b.corpus).unwrap();
    assert_eq!(corpus_a, corpus_b, "same seed must give byte-identical corpora");
    assert_eq!(
        std::fs::read(&a.table).unwrap(),
        std::fs::read(&b.table).unwrap()
    );

    let text = String::from_utf8(corpus_a).unwrap();
    assert_eq!(text.lines().count(), 6 * 20 + 120);
    let first: serde_line::Record = serde_line::parse(text.lines().next().unwrap());
    assert_eq!(first.id, "m000000");
    assert!(first.timestamp >= 0);

    let table_text = std::fs::read_to_string(&a.table).unwrap();
    let header = table_text.lines().next().unwrap();
    assert!(header.ends_with(" 16"), "header {header:?} should end with the dimension");
}

/// Minimal hand-rolled record check so the test does not depend on the
/// library's own serde types.
mod serde_line {
    pub struct Record {
        pub id: String,
        pub timestamp: i64,
    }

    pub fn parse(line: &str) -> Record {
        let field = |name: &str| -> String {
            let key = format!("\"{name}\":");
            let start = line.find(&key).expect("field present") + key.len();
            line[start..]
                .trim_start()
                .trim_start_matches('"')
                .chars()
                .take_while(|c| !matches!(c, '"' | ',' | '}'))
                .collect()
        };
        Record {
            id: field("id"),
            timestamp: field("timestamp").parse().unwrap(),
        }
    }
}

#[test]
fn synth_rejects_zero_message_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = newsthread(
        &[
            "synth",
            "--synth.events", "0",
            "--synth.messages_per_event", "0",
            "--synth.noise_messages", "0",
        ],
        &[("--out", &out)],
    );
    assert_one_line_error(&output, "zero messages");
}

#[test]
fn synth_rejects_unknown_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = newsthread(&["synth", "--synth.bogus", "1"], &[("--out", &out)]);
    assert_one_line_error(&output, "unknown configuration key");
}

// ---------------------------------------------------------------- train

#[test]
fn train_happy_path_writes_model_and_reports_accuracy() {
    let fx = fixture("11");
    let mut args = vec!["train"];
    args.extend(small_training_args());
    let output = newsthread(
        &args,
        &[
            ("--out", &fx.out),
            ("--paths.corpus", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert!(output.status.success(), "{}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.starts_with("trained on 240 examples: validation_accuracy="));
    let accuracy: f64 = stdout
        .split("validation_accuracy=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(accuracy >= 0.9, "validation accuracy {accuracy}");
    assert!(fx.out.join("model.bin").is_file());
}

#[test]
fn train_rejects_empty_corpus() {
    let fx = fixture("12");
    let empty = fx.out.join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let output = newsthread(
        &["train"],
        &[
            ("--out", &fx.out),
            ("--paths.corpus", &empty),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert_one_line_error(&output, "zero parseable records");
}

#[test]
fn train_rejects_invalid_momentum() {
    let fx = fixture("13");
    let output = newsthread(
        &["train", "--training.momentum", "1.5"],
        &[
            ("--out", &fx.out),
            ("--paths.corpus", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert_one_line_error(&output, "momentum");
}

// --------------------------------------------------------------- detect

#[test]
fn detect_happy_path_writes_reports() {
    let fx = fixture("14");
    let mut train_args = vec!["train"];
    train_args.extend(small_training_args());
    let trained = newsthread(
        &train_args,
        &[
            ("--out", &fx.out),
            ("--paths.corpus", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert!(trained.status.success(), "{}", stderr_of(&trained));

    let output = newsthread(
        &["detect", "--ranking.min_entropy", "2.0"],
        &[
            ("--out", &fx.out),
            ("--input", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert!(output.status.success(), "{}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("stream: 240 messages"));
    assert!(stdout.contains("candidates:"));

    let candidates = std::fs::read_to_string(fx.out.join("candidates.tsv")).unwrap();
    assert_eq!(
        candidates.lines().next().unwrap(),
        "thread_id\tsize\tentropy\tgrowth\tmean_confidence\tunique_author_ratio\treason\ttop_terms"
    );
    let assignments = std::fs::read_to_string(fx.out.join("assignments.tsv")).unwrap();
    assert_eq!(
        assignments.lines().next().unwrap(),
        "message_id\toutcome\tthread_id\tdistance"
    );
    // One assignment row per kept message.
    let kept: usize = stdout
        .split(" kept as news")
        .next()
        .unwrap()
        .rsplit(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(assignments.lines().count(), kept + 1);
    assert!(kept >= 100, "classifier kept only {kept} of 120 event messages");
}

#[test]
fn detect_rejects_missing_model() {
    let fx = fixture("15");
    let output = newsthread(
        &["detect"],
        &[
            ("--out", &fx.out),
            ("--input", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert_one_line_error(&output, "model.bin");
}

#[test]
fn detect_rejects_bad_config() {
    let fx = fixture("16");
    let output = newsthread(
        &["detect", "--clustering.threshold", "maximum"],
        &[
            ("--out", &fx.out),
            ("--input", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert_one_line_error(&output, "clustering.threshold");
}

// ------------------------------------------------------------- evaluate

#[test]
fn evaluate_happy_path_report_shape() {
    let fx = fixture("17");
    let mut args = vec![
        "evaluate",
        "--eval.splits", "2",
        "--clustering.window", "500",
    ];
    args.extend(small_training_args());
    let output = newsthread(
        &args,
        &[
            ("--out", &fx.out),
            ("--paths.corpus", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(stdout_of(&output).starts_with("splits=2 mean: P="));

    let table = std::fs::read_to_string(fx.out.join("metrics.tsv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0],
        "split\tprecision\trecall\tf1\thomogeneity\tcompleteness\tv_measure"
    );
    assert_eq!(lines.len(), 1 + 2 + 2, "header, two splits, mean, std");
    assert!(lines[3].starts_with("mean\t"));
    assert!(lines[4].starts_with("std\t"));

    let jsonl = std::fs::read_to_string(fx.out.join("metrics.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 4);
    assert!(jsonl.lines().all(|l| l.starts_with('{') && l.ends_with('}')));
}

#[test]
fn evaluate_rejects_empty_corpus() {
    let fx = fixture("18");
    let empty = fx.out.join("empty.jsonl");
    std::fs::write(&empty, "\n\n").unwrap();
    let output = newsthread(
        &["evaluate"],
        &[
            ("--out", &fx.out),
            ("--paths.corpus", &empty),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert_one_line_error(&output, "zero parseable records");
}

#[test]
fn evaluate_rejects_zero_splits() {
    let fx = fixture("19");
    let output = newsthread(
        &["evaluate", "--eval.splits", "0"],
        &[
            ("--out", &fx.out),
            ("--paths.corpus", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert_one_line_error(&output, "eval.splits");
}

// ---------------------------------------------------------------- sweep

#[test]
fn sweep_happy_path_covers_grid_and_flag_overrides_file() {
    let fx = fixture("20");
    // A config file sets one grid; the flag must win.
    let config = fx.out.join("sweep.conf");
    std::fs::write(&config, "sweep.thresholds = 0.10, 0.20\nsweep.batch_sizes = 25\n").unwrap();

    let output = newsthread(
        &[
            "sweep",
            "--sweep.thresholds", "0.23,0.30",
            "--clustering.window", "500",
        ],
        &[
            ("--config", &config),
            ("--out", &fx.out),
            ("--paths.corpus", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(stdout_of(&output).starts_with("best cell: algorithm="));

    let table = std::fs::read_to_string(fx.out.join("sweep.tsv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0],
        "algorithm\tbatch\tstopwords\tthreshold\thomogeneity\tcompleteness\tv_measure"
    );
    // 2 profiles x (online + minibatch@b=25) x 2 thresholds from the flag.
    assert_eq!(lines.len(), 1 + 2 * 2 * 2);
    assert!(table.contains("\t0.23\t"), "flag thresholds in effect");
    assert!(!table.contains("\t0.10\t"), "file thresholds overridden");
    assert!(table.contains("\t25\t"), "file batch size still in effect");
}

#[test]
fn sweep_rejects_unlabeled_corpus() {
    let fx = fixture("21");
    let unlabeled = fx.out.join("unlabeled.jsonl");
    std::fs::write(
        &unlabeled,
        "{\"id\":\"a\",\"author_id\":\"u\",\"timestamp\":1,\"text\":\"plain chatter\"}\n",
    )
    .unwrap();
    let output = newsthread(
        &["sweep"],
        &[
            ("--out", &fx.out),
            ("--paths.corpus", &unlabeled),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert_one_line_error(&output, "no ground-truth event messages");
}

#[test]
fn sweep_rejects_unparseable_grid() {
    let fx = fixture("22");
    let output = newsthread(
        &["sweep", "--sweep.thresholds", "low,high"],
        &[
            ("--out", &fx.out),
            ("--paths.corpus", &fx.corpus),
            ("--paths.embeddings", &fx.table),
        ],
    );
    assert_one_line_error(&output, "sweep.thresholds");
}

// ---------------------------------------------------------------- bench

#[test]
fn bench_happy_path_series_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = newsthread(
        &[
            "bench",
            "--bench.messages", "400",
            "--bench.window", "100",
            "--bench.dim", "8",
        ],
        &[("--out", &out)],
    );
    assert!(output.status.success(), "{}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("online: plateau mean"));
    assert!(stdout.contains("minibatch: plateau mean"));
    assert!(stdout.contains("speedup: online/minibatch"));

    for name in ["bench_online.tsv", "bench_minibatch.tsv"] {
        let series = std::fs::read_to_string(out.join(name)).unwrap();
        let lines: Vec<&str> = series.lines().collect();
        assert_eq!(lines[0], "messages_clustered\tper_message_seconds");
        assert_eq!(lines.len(), 401, "{name} should have one row per message");
        assert!(lines[1].starts_with("1\t"));
        assert!(lines[400].starts_with("400\t"));
    }
}

#[test]
fn bench_rejects_stream_shorter_than_window() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = newsthread(
        &["bench", "--bench.messages", "50", "--bench.window", "100"],
        &[("--out", &out)],
    );
    assert_one_line_error(&output, "must exceed the window");
}

#[test]
fn bench_rejects_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = newsthread(&["bench", "--bench.windw", "10"], &[("--out", &out)]);
    assert_one_line_error(&output, "unknown configuration key");
}
