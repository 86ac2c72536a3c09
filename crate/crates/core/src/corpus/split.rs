//! Train/test split generation.
//!
//! Whole events are assigned to the test side at random until the test set
//! reaches the requested fraction of the full corpus, so no event is ever
//! split across the two sides. Only events whose size falls inside the
//! configured bounds are eligible for the test-side ground truth; events
//! outside the bounds stay on the train side. Non-event messages are
//! assigned independently with probability `test_fraction`.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed;

use super::{Corpus, Label};

/// Parameters governing one train/test split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub seed: u64,
    /// Target test share of the full corpus, in (0, 1).
    pub test_fraction: f64,
    /// Smallest event size eligible for test-side ground truth.
    pub min_event_size: usize,
    /// Largest event size eligible for test-side ground truth.
    pub max_event_size: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            test_fraction: 0.30,
            min_event_size: 10,
            max_event_size: 400,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidInput(
                "test_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        if self.min_event_size > self.max_event_size {
            return Err(Error::InvalidInput(
                "min_event_size must not exceed max_event_size".into(),
            ));
        }
        Ok(())
    }
}

/// Splits a fully labeled corpus into train and test sides.
///
/// Deterministic given `spec.seed`. Events are added whole until the test
/// side first reaches `test_fraction` of the corpus, so the realized test
/// share lands in `[test_fraction, test_fraction + largest event share)`.
pub fn make_split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    spec.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidInput("cannot split an empty corpus".into()));
    }
    for message in corpus.messages() {
        if corpus.label(&message.id).is_none() {
            return Err(Error::InvalidInput(format!(
                "corpus must be fully labeled before splitting (message `{}` has no label)",
                message.id
            )));
        }
    }

    let total = corpus.len() as f64;
    let threshold = spec.test_fraction * total;

    // Non-event messages: independent uniform assignment.
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed::derive(spec.seed, "split:nonevent"));
    let mut test_ids: BTreeSet<String> = BTreeSet::new();
    for message in corpus.messages() {
        if corpus.label(&message.id) == Some(&Label::NotEvent)
            && noise_rng.random::<f64>() < spec.test_fraction
        {
            test_ids.insert(message.id.clone());
        }
    }

    // Whole events, in shuffled order, until the threshold is crossed.
    let sizes = corpus.event_sizes();
    let mut eligible: Vec<&String> = sizes
        .iter()
        .filter(|(_, size)| (spec.min_event_size..=spec.max_event_size).contains(size))
        .map(|(event, _)| event)
        .collect();
    let mut event_rng = ChaCha8Rng::seed_from_u64(seed::derive(spec.seed, "split:events"));
    eligible.shuffle(&mut event_rng);

    let mut test_count = test_ids.len() as f64;
    let mut test_events: BTreeSet<&str> = BTreeSet::new();
    let mut remaining = eligible.into_iter();
    while test_count < threshold {
        let Some(event) = remaining.next() else {
            return Err(Error::InvalidInput(format!(
                "corpus too small to satisfy test_fraction {}",
                spec.test_fraction
            )));
        };
        test_events.insert(event);
        test_count += sizes[event] as f64;
    }

    for message in corpus.messages() {
        if let Some(Label::Event(e)) = corpus.label(&message.id) {
            if test_events.contains(e.as_str()) {
                test_ids.insert(message.id.clone());
            }
        }
    }

    let train_ids: BTreeSet<String> = corpus
        .messages()
        .iter()
        .map(|m| m.id.clone())
        .filter(|id| !test_ids.contains(id))
        .collect();

    Ok((corpus.restrict(&train_ids), corpus.restrict(&test_ids)))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::corpus::Message;

    fn labeled_corpus(events: &[(&str, usize)], noise: usize) -> Corpus {
        let mut messages = Vec::new();
        let mut labels = BTreeMap::new();
        let mut ts = 0i64;
        for (event, size) in events {
            for k in 0..*size {
                let id = format!("{event}-{k}");
                messages.push(Message {
                    id: id.clone(),
                    author_id: format!("u{k}"),
                    timestamp: ts,
                    text: "event text".into(),
                });
                labels.insert(id, Label::Event(event.to_string()));
                ts += 1;
            }
        }
        for k in 0..noise {
            let id = format!("noise-{k}");
            messages.push(Message {
                id: id.clone(),
                author_id: format!("n{k}"),
                timestamp: ts,
                text: "noise".into(),
            });
            labels.insert(id, Label::NotEvent);
            ts += 1;
        }
        Corpus::new(messages, labels).unwrap()
    }

    fn spec(seed: u64) -> SplitSpec {
        SplitSpec {
            seed,
            test_fraction: 0.3,
            min_event_size: 10,
            max_event_size: 400,
        }
    }

    #[test]
    fn same_seed_gives_identical_splits() {
        let corpus = labeled_corpus(&[("e1", 12), ("e2", 15), ("e3", 20), ("e4", 11)], 60);
        let (train_a, test_a) = make_split(&corpus, &spec(7)).unwrap();
        let (train_b, test_b) = make_split(&corpus, &spec(7)).unwrap();
        assert_eq!(train_a.messages(), train_b.messages());
        assert_eq!(test_a.messages(), test_b.messages());
        assert_eq!(train_a.labels(), train_b.labels());
    }

    #[test]
    fn different_seeds_usually_differ() {
        let corpus = labeled_corpus(&[("e1", 12), ("e2", 15), ("e3", 20), ("e4", 11)], 60);
        let (_, test_a) = make_split(&corpus, &spec(1)).unwrap();
        let (_, test_b) = make_split(&corpus, &spec(2)).unwrap();
        assert_ne!(test_a.messages(), test_b.messages());
    }

    #[test]
    fn small_events_stay_out_of_test_ground_truth() {
        let corpus = labeled_corpus(&[("tiny", 8), ("e1", 30), ("e2", 30)], 40);
        for seed in 0..5 {
            let (train, test) = make_split(&corpus, &spec(seed)).unwrap();
            assert!(!test.event_sizes().contains_key("tiny"));
            assert_eq!(train.event_sizes().get("tiny"), Some(&8));
        }
    }

    #[test]
    fn oversized_events_stay_out_of_test_ground_truth() {
        let corpus = labeled_corpus(&[("huge", 500), ("e1", 300), ("e2", 300), ("e3", 250)], 150);
        let mut cfg = spec(3);
        cfg.max_event_size = 400;
        let (train, test) = make_split(&corpus, &cfg).unwrap();
        assert!(!test.event_sizes().contains_key("huge"));
        assert_eq!(train.event_sizes().get("huge"), Some(&500));
    }

    #[test]
    fn no_event_spans_both_sides() {
        let corpus = labeled_corpus(&[("e1", 12), ("e2", 15), ("e3", 20), ("e4", 11)], 60);
        for seed in 0..10 {
            let (train, test) = make_split(&corpus, &spec(seed)).unwrap();
            let train_events: BTreeSet<String> = train.event_sizes().into_keys().collect();
            let test_events: BTreeSet<String> = test.event_sizes().into_keys().collect();
            assert!(train_events.is_disjoint(&test_events));
            assert_eq!(train.len() + test.len(), corpus.len());
        }
    }

    #[test]
    fn test_side_reaches_requested_fraction() {
        let corpus = labeled_corpus(&[("e1", 20), ("e2", 25), ("e3", 30), ("e4", 15)], 110);
        let (_, test) = make_split(&corpus, &spec(11)).unwrap();
        assert!(test.len() as f64 >= 0.3 * corpus.len() as f64);
    }

    #[test]
    fn outputs_are_timestamp_ordered() {
        let corpus = labeled_corpus(&[("e1", 12), ("e2", 15)], 50);
        let (train, test) = make_split(&corpus, &spec(5)).unwrap();
        for side in [&train, &test] {
            assert!(side
                .messages()
                .windows(2)
                .all(|w| w[0].timestamp <= w[1].timestamp));
        }
    }

    #[test]
    fn unlabeled_corpus_is_rejected() {
        let corpus = Corpus::new(
            vec![Message {
                id: "a".into(),
                author_id: "u".into(),
                timestamp: 0,
                text: "t".into(),
            }],
            BTreeMap::new(),
        )
        .unwrap();
        assert!(make_split(&corpus, &spec(0)).is_err());
    }

    #[test]
    fn impossible_fraction_is_an_error() {
        // All events ineligible and no noise: nothing can reach 30%.
        let corpus = labeled_corpus(&[("tiny1", 3), ("tiny2", 4)], 0);
        assert!(make_split(&corpus, &spec(0)).is_err());
    }
}
