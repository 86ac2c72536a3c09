//! Clustering-quality and detection-quality scoring, plus the seeded
//! multi-split experimental protocol and the threshold sweep.

mod cluster_metrics;
mod detection;
mod protocol;
mod sweep;

use crate::error::{Error, Result};

pub use cluster_metrics::cluster_metrics;
pub use detection::{match_detections, CandidateCluster};
pub use protocol::{
    render_metrics_jsonl, render_metrics_table, run_protocol, MetricSummary, ProtocolResult,
    SplitOutcome,
};
pub use sweep::{render_sweep_table, threshold_sweep, SweepRow, SweepSpec};

/// Homogeneity, completeness, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterMetrics {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

impl ClusterMetrics {
    pub fn zero() -> Self {
        Self {
            homogeneity: 0.0,
            completeness: 0.0,
            v_measure: 0.0,
        }
    }
}

/// When a candidate event counts as detecting a ground-truth event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionCriterion {
    /// Minimum candidate size (inclusive).
    pub min_candidate_size: usize,
    /// Minimum fraction of members belonging to one ground-truth event.
    pub min_purity: f64,
}

impl Default for DetectionCriterion {
    fn default() -> Self {
        Self {
            min_candidate_size: 5,
            min_purity: 0.80,
        }
    }
}

impl DetectionCriterion {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_purity > 0.0 && self.min_purity <= 1.0) {
            return Err(Error::InvalidInput(
                "min_purity must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// End-to-end detection scores for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched_candidates: usize,
    pub total_candidates: usize,
    pub detected_events: usize,
    pub total_events: usize,
    /// Set when precision was undefined (no candidates) and reported as 0.
    pub no_candidates: bool,
}

impl DetectionMetrics {
    pub(crate) fn f1_of(precision: f64, recall: f64) -> f64 {
        if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        }
    }
}
