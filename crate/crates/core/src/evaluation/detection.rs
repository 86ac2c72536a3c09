//! Matching candidate events against ground-truth events.

use std::collections::{BTreeMap, BTreeSet};

use crate::clustering::{Thread, ThreadId};
use crate::ranking::CandidateEvent;

use super::{DetectionCriterion, DetectionMetrics};

/// Membership view of one candidate event, however it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCluster {
    pub thread_id: ThreadId,
    pub member_ids: Vec<String>,
}

impl From<&Thread> for CandidateCluster {
    fn from(thread: &Thread) -> Self {
        Self {
            thread_id: thread.thread_id,
            member_ids: thread.member_ids(),
        }
    }
}

impl From<&CandidateEvent> for CandidateCluster {
    fn from(candidate: &CandidateEvent) -> Self {
        Self {
            thread_id: candidate.thread_id,
            member_ids: candidate.member_ids.clone(),
        }
    }
}

/// Scores candidates against ground truth.
///
/// `truth` maps message id → event id and must already be restricted to
/// the eligible events. A candidate detects event `e` when it has at least
/// `min_candidate_size` members and at least `min_purity` of them are
/// labeled `e`. Precision counts matched candidates over all candidates
/// (several candidates may match the same event); recall counts distinct
/// detected events over all eligible events.
pub fn match_detections(
    candidates: &[CandidateCluster],
    truth: &BTreeMap<String, String>,
    criterion: &DetectionCriterion,
) -> DetectionMetrics {
    let eligible: BTreeSet<&str> = truth.values().map(String::as_str).collect();

    let mut matched_candidates = 0usize;
    let mut detected: BTreeSet<&str> = BTreeSet::new();
    for candidate in candidates {
        let size = candidate.member_ids.len();
        if size < criterion.min_candidate_size {
            continue;
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for member in &candidate.member_ids {
            if let Some(event) = truth.get(member) {
                *counts.entry(event.as_str()).or_insert(0) += 1;
            }
        }
        // Largest event share; ties break toward the smaller event id so
        // the outcome never depends on map iteration order.
        let Some((event, count)) = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        else {
            continue;
        };
        if *count as f64 / size as f64 >= criterion.min_purity {
            matched_candidates += 1;
            detected.insert(event);
        }
    }

    let total_candidates = candidates.len();
    let total_events = eligible.len();
    let no_candidates = total_candidates == 0;
    let precision = if no_candidates {
        0.0
    } else {
        matched_candidates as f64 / total_candidates as f64
    };
    let recall = if total_events == 0 {
        0.0
    } else {
        detected.len() as f64 / total_events as f64
    };

    DetectionMetrics {
        precision,
        recall,
        f1: DetectionMetrics::f1_of(precision, recall),
        matched_candidates,
        total_candidates,
        detected_events: detected.len(),
        total_events,
        no_candidates,
    }
}
