//! Corpus file formats: line-delimited JSON and tab-separated values.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Corpus, Label, Message};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One flat JSON object per line: `id`, `author_id`, `timestamp`,
    /// `text`, optional `event_id`.
    Jsonl,
    /// Tab-separated columns `id  author_id  timestamp  text  [event_id]`,
    /// header line required.
    Tsv,
}

impl CorpusFormat {
    /// Guesses the format from a file extension; defaults to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("tab") => CorpusFormat::Tsv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(Error::InvalidInput(format!(
                "unknown corpus format `{other}` (expected jsonl or tsv)"
            ))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    author_id: String,
    timestamp: i64,
    text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    event_id: Option<String>,
}

/// A loaded [`Corpus`] plus the number of malformed lines skipped.
#[derive(Debug)]
pub struct CorpusLoad {
    pub corpus: Corpus,
    pub skipped: usize,
}

/// Loads a corpus file. Malformed lines (unparseable, empty id, negative
/// timestamp, duplicate id) are counted and skipped; the result is sorted
/// by timestamp. Zero parseable records is an error.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<CorpusLoad> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut messages = Vec::new();
    let mut labels = BTreeMap::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut skipped = 0usize;
    let mut header_checked = false;

    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if format == CorpusFormat::Tsv && !header_checked {
            header_checked = true;
            if !line.starts_with("id\t") {
                return Err(Error::Format(format!(
                    "{}: missing TSV header line (expected `id\\tauthor_id\\t...`)",
                    path.display()
                )));
            }
            continue;
        }
        let record = match format {
            CorpusFormat::Jsonl => serde_json::from_str::<Record>(&line).ok(),
            CorpusFormat::Tsv => parse_tsv_row(&line),
        };
        let Some(record) = record else {
            skipped += 1;
            continue;
        };
        if record.id.is_empty() || record.timestamp < 0 || !seen.insert(record.id.clone()) {
            skipped += 1;
            continue;
        }
        if let Some(event_id) = record.event_id {
            labels.insert(record.id.clone(), Label::Event(event_id));
        }
        messages.push(Message {
            id: record.id,
            author_id: record.author_id,
            timestamp: record.timestamp,
            text: record.text,
        });
    }

    if messages.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: zero parseable records",
            path.display()
        )));
    }
    let corpus = Corpus::new(messages, labels)?;
    Ok(CorpusLoad { corpus, skipped })
}

fn parse_tsv_row(line: &str) -> Option<Record> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 && fields.len() != 5 {
        return None;
    }
    let timestamp = fields[2].parse::<i64>().ok()?;
    let event_id = fields
        .get(4)
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(str::to_string);
    Some(Record {
        id: fields[0].to_string(),
        author_id: fields[1].to_string(),
        timestamp,
        text: fields[3].to_string(),
        event_id,
    })
}

/// Writes a corpus in the given format. Output is byte-stable: messages go
/// out in replay order with their labels inlined as `event_id`.
pub fn write_corpus(path: &Path, corpus: &Corpus, format: CorpusFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    if format == CorpusFormat::Tsv {
        writeln!(out, "id\tauthor_id\ttimestamp\ttext\tevent_id").map_err(|e| Error::io(path, e))?;
    }
    for message in corpus.replay() {
        let event_id = corpus
            .label(&message.id)
            .and_then(|l| l.event_id())
            .map(str::to_string);
        match format {
            CorpusFormat::Jsonl => {
                let record = Record {
                    id: message.id.clone(),
                    author_id: message.author_id.clone(),
                    timestamp: message.timestamp,
                    text: message.text.clone(),
                    event_id,
                };
                let json = serde_json::to_string(&record)
                    .map_err(|e| Error::Format(format!("serialize record: {e}")))?;
                writeln!(out, "{json}").map_err(|e| Error::io(path, e))?;
            }
            CorpusFormat::Tsv => {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    message.id,
                    message.author_id,
                    message.timestamp,
                    message.text,
                    event_id.unwrap_or_default()
                )
                .map_err(|e| Error::io(path, e))?;
            }
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use std::io::Write as _;

    use tempfile::NamedTempFile;

    use super::*;

    fn write_temp(contents: &str) -> NamedTempFile {
        let mut file = NamedTempFile::new().unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file.flush().unwrap();
        file
    }

    #[test]
    fn jsonl_skips_malformed_lines() {
        let file = write_temp(concat!(
            "{\"id\":\"a\",\"author_id\":\"u1\",\"timestamp\":3,\"text\":\"hi\"}\n",
            "not json at all\n",
            "{\"id\":\"b\",\"author_id\":\"u2\",\"timestamp\":1,\"text\":\"yo\",\"event_id\":\"e1\"}\n",
            "{\"id\":\"c\",\"author_id\":\"u3\",\"timestamp\":2,\"text\":\"ok\"}\n",
        ));
        let load = load_corpus(file.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(load.corpus.len(), 3);
        assert_eq!(load.skipped, 1);
        assert_eq!(
            load.corpus.label("b"),
            Some(&Label::Event("e1".to_string()))
        );
    }

    #[test]
    fn out_of_order_records_are_sorted() {
        let file = write_temp(concat!(
            "{\"id\":\"late\",\"author_id\":\"u\",\"timestamp\":9,\"text\":\"t\"}\n",
            "{\"id\":\"early\",\"author_id\":\"u\",\"timestamp\":1,\"text\":\"t\"}\n",
        ));
        let load = load_corpus(file.path(), CorpusFormat::Jsonl).unwrap();
        let ids: Vec<&str> = load.corpus.messages().iter().map(|m| m.id.as_str()).collect();
        assert_eq!(ids, ["early", "late"]);
    }

    #[test]
    fn empty_file_is_an_error() {
        let file = write_temp("");
        let err = load_corpus(file.path(), CorpusFormat::Jsonl).unwrap_err();
        assert!(err.to_string().contains("zero parseable records"));
    }

    #[test]
    fn tsv_requires_header() {
        let file = write_temp("a\tu1\t5\thello\n");
        assert!(load_corpus(file.path(), CorpusFormat::Tsv).is_err());
    }

    #[test]
    fn tsv_round_trip() {
        let file = write_temp(
            "id\tauthor_id\ttimestamp\ttext\tevent_id\na\tu1\t5\thello world\te1\nb\tu2\t2\tquiet\t\n",
        );
        let load = load_corpus(file.path(), CorpusFormat::Tsv).unwrap();
        assert_eq!(load.corpus.len(), 2);
        assert_eq!(load.corpus.label("a"), Some(&Label::Event("e1".into())));
        assert_eq!(load.corpus.label("b"), None);

        let out = NamedTempFile::new().unwrap();
        write_corpus(out.path(), &load.corpus, CorpusFormat::Tsv).unwrap();
        let reload = load_corpus(out.path(), CorpusFormat::Tsv).unwrap();
        assert_eq!(reload.corpus.len(), 2);
        assert_eq!(reload.corpus.messages(), load.corpus.messages());
    }

    #[test]
    fn duplicate_ids_count_as_skipped() {
        let file = write_temp(concat!(
            "{\"id\":\"a\",\"author_id\":\"u\",\"timestamp\":1,\"text\":\"x\"}\n",
            "{\"id\":\"a\",\"author_id\":\"u\",\"timestamp\":2,\"text\":\"y\"}\n",
        ));
        let load = load_corpus(file.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(load.corpus.len(), 1);
        assert_eq!(load.skipped, 1);
    }
}
