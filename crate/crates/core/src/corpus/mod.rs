//! Corpus data model, ingestion, ground truth, splits, and stream replay.
//!
//! A [`Corpus`] is immutable after construction: messages are held in
//! ascending timestamp order (stable with respect to input order on ties),
//! and ground-truth labels live in a side map keyed by message id. Replay
//! is a plain pull-based iterator, so the caller controls pacing.

mod io;
mod split;
mod synth;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub use io::{load_corpus, write_corpus, CorpusFormat, CorpusLoad};
pub use split::{make_split, SplitSpec};
pub use synth::{generate_synthetic, synthetic_embedding_table, SyntheticConfig};

/// One ingested short-text item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub id: String,
    pub author_id: String,
    /// Seconds since epoch; never negative.
    pub timestamp: i64,
    pub text: String,
}

/// Ground-truth label for one message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Label {
    Event(String),
    NotEvent,
}

impl Label {
    pub fn is_event(&self) -> bool {
        matches!(self, Label::Event(_))
    }

    pub fn event_id(&self) -> Option<&str> {
        match self {
            Label::Event(id) => Some(id),
            Label::NotEvent => None,
        }
    }
}

/// An ordered message sequence with optional ground truth.
#[derive(Debug, Clone)]
pub struct Corpus {
    messages: Vec<Message>,
    labels: BTreeMap<String, Label>,
}

impl Corpus {
    /// Builds a corpus from messages and labels. Messages are stably sorted
    /// by timestamp; ids must be unique and non-empty, timestamps
    /// non-negative, and every label must refer to a present message.
    pub fn new(mut messages: Vec<Message>, labels: BTreeMap<String, Label>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for message in &messages {
            if message.id.is_empty() {
                return Err(Error::InvalidInput("message with empty id".into()));
            }
            if message.timestamp < 0 {
                return Err(Error::InvalidInput(format!(
                    "message `{}` has negative timestamp",
                    message.id
                )));
            }
            if !seen.insert(message.id.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate message id `{}`",
                    message.id
                )));
            }
        }
        for id in labels.keys() {
            if !seen.contains(id.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "label refers to unknown message id `{id}`"
                )));
            }
        }
        messages.sort_by_key(|m| m.timestamp);
        Ok(Self { messages, labels })
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn label(&self, message_id: &str) -> Option<&Label> {
        self.labels.get(message_id)
    }

    pub fn labels(&self) -> &BTreeMap<String, Label> {
        &self.labels
    }

    pub fn has_labels(&self) -> bool {
        !self.labels.is_empty()
    }

    /// Yields messages one at a time in timestamp order (ties keep input
    /// order). Pull-based: the caller controls pacing.
    pub fn replay(&self) -> impl Iterator<Item = &Message> {
        self.messages.iter()
    }

    /// Normalizes ground truth to the binary classification view: events
    /// whose id is in `sport_event_ids` become `NotEvent`, unlabeled
    /// messages become `NotEvent`, and every other event keeps its id.
    /// After this every message carries a label. Idempotent.
    pub fn apply_label_policy(&self, sport_event_ids: &BTreeSet<String>) -> Corpus {
        let labels = self
            .messages
            .iter()
            .map(|m| {
                let label = match self.labels.get(&m.id) {
                    Some(Label::Event(e)) if !sport_event_ids.contains(e) => {
                        Label::Event(e.clone())
                    }
                    _ => Label::NotEvent,
                };
                (m.id.clone(), label)
            })
            .collect();
        Corpus {
            messages: self.messages.clone(),
            labels,
        }
    }

    /// Event id → number of member messages, for events present in the
    /// ground truth.
    pub fn event_sizes(&self) -> BTreeMap<String, usize> {
        let mut sizes = BTreeMap::new();
        for label in self.labels.values() {
            if let Label::Event(e) = label {
                *sizes.entry(e.clone()).or_insert(0) += 1;
            }
        }
        sizes
    }

    /// Sub-corpus containing exactly the messages whose ids are in `keep`,
    /// preserving order and restricting labels.
    pub(crate) fn restrict(&self, keep: &BTreeSet<String>) -> Corpus {
        let messages: Vec<Message> = self
            .messages
            .iter()
            .filter(|m| keep.contains(&m.id))
            .cloned()
            .collect();
        let labels = self
            .labels
            .iter()
            .filter(|(id, _)| keep.contains(*id))
            .map(|(id, l)| (id.clone(), l.clone()))
            .collect();
        Corpus { messages, labels }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn msg(id: &str, ts: i64) -> Message {
        Message {
            id: id.to_string(),
            author_id: format!("author-{id}"),
            timestamp: ts,
            text: format!("text {id}"),
        }
    }

    #[test]
    fn construction_sorts_by_timestamp_stably() {
        let corpus = Corpus::new(
            vec![msg("c", 5), msg("a", 1), msg("b", 5)],
            BTreeMap::new(),
        )
        .unwrap();
        let ids: Vec<&str> = corpus.messages().iter().map(|m| m.id.as_str()).collect();
        // Equal timestamps keep input order: c before b.
        assert_eq!(ids, ["a", "c", "b"]);
    }

    #[test]
    fn construction_rejects_duplicate_ids() {
        let err = Corpus::new(vec![msg("a", 1), msg("a", 2)], BTreeMap::new()).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn construction_rejects_negative_timestamp() {
        assert!(Corpus::new(vec![msg("a", -1)], BTreeMap::new()).is_err());
    }

    #[test]
    fn replay_reproduces_corpus_order() {
        let corpus = Corpus::new(
            vec![msg("a", 3), msg("b", 1), msg("c", 2)],
            BTreeMap::new(),
        )
        .unwrap();
        let replayed: Vec<&Message> = corpus.replay().collect();
        assert_eq!(replayed.len(), 3);
        assert!(replayed.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        let direct: Vec<&Message> = corpus.messages().iter().collect();
        assert_eq!(replayed, direct);
    }

    #[test]
    fn replay_empty_corpus_is_empty() {
        let corpus = Corpus::new(vec![], BTreeMap::new()).unwrap();
        assert_eq!(corpus.replay().count(), 0);
    }

    #[test]
    fn label_policy_maps_sport_and_unlabeled_to_not_event() {
        let mut labels = BTreeMap::new();
        labels.insert("a".to_string(), Label::Event("e1".to_string()));
        labels.insert("b".to_string(), Label::Event("sport1".to_string()));
        let corpus =
            Corpus::new(vec![msg("a", 1), msg("b", 2), msg("c", 3)], labels).unwrap();

        let sports: BTreeSet<String> = ["sport1".to_string()].into();
        let normalized = corpus.apply_label_policy(&sports);

        assert_eq!(
            normalized.label("a"),
            Some(&Label::Event("e1".to_string()))
        );
        assert_eq!(normalized.label("b"), Some(&Label::NotEvent));
        assert_eq!(normalized.label("c"), Some(&Label::NotEvent));
    }

    #[test]
    fn label_policy_is_idempotent() {
        let mut labels = BTreeMap::new();
        labels.insert("a".to_string(), Label::Event("e1".to_string()));
        labels.insert("b".to_string(), Label::Event("sport1".to_string()));
        let corpus = Corpus::new(vec![msg("a", 1), msg("b", 2)], labels).unwrap();
        let sports: BTreeSet<String> = ["sport1".to_string()].into();

        let once = corpus.apply_label_policy(&sports);
        let twice = once.apply_label_policy(&sports);
        assert_eq!(once.labels(), twice.labels());
    }
}
