//! Candidate-event selection and ordering.
//!
//! Threads pass a filter cascade (size, mean confidence, recency, unique
//! authors), the largest and fastest-growing survivors form the candidate
//! pool, low-entropy candidates are discarded as spam, and the final list
//! is the highest-entropy remainder.

use std::io::Write;
use std::path::Path;

use crate::clustering::{Thread, ThreadId};
use crate::error::{Error, Result};

/// Thresholds and sizes for candidate selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingConfig {
    /// How many of the largest filtered threads to keep.
    pub top_k_size: usize,
    /// How many of the fastest-growing filtered threads to keep.
    pub top_k_growth: usize,
    /// Candidates must be strictly larger than this.
    pub min_size: usize,
    pub min_mean_confidence: f64,
    /// Mean member timestamp must be at most this many seconds old.
    pub recency_window: i64,
    pub min_unique_author_ratio: f64,
    /// Candidates with term entropy below this are dropped.
    pub min_entropy: f64,
    /// Size of the final ranked list.
    pub final_k: usize,
    /// Horizon for the growth-rate comparison, in seconds.
    pub growth_horizon: i64,
}

impl Default for RankingConfig {
    fn default() -> Self {
        Self {
            top_k_size: 100,
            top_k_growth: 100,
            min_size: 5,
            min_mean_confidence: 0.85,
            recency_window: 86_400,
            min_unique_author_ratio: 0.85,
            min_entropy: 5.0,
            final_k: 20,
            growth_horizon: 3_600,
        }
    }
}

impl RankingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_mean_confidence)
            || !(0.0..=1.0).contains(&self.min_unique_author_ratio)
        {
            return Err(Error::InvalidInput(
                "confidence and author-ratio thresholds must lie in [0, 1]".into(),
            ));
        }
        if self.top_k_size == 0 || self.top_k_growth == 0 || self.final_k == 0 {
            return Err(Error::InvalidInput("top-k counts must be > 0".into()));
        }
        if self.recency_window <= 0 || self.growth_horizon <= 0 {
            return Err(Error::InvalidInput(
                "recency_window and growth_horizon must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Why a thread entered the candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionReason {
    BySize,
    ByGrowth,
}

impl std::fmt::Display for SelectionReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SelectionReason::BySize => write!(f, "size"),
            SelectionReason::ByGrowth => write!(f, "growth"),
        }
    }
}

/// A thread that survived every filter, with its score components.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEvent {
    pub thread_id: ThreadId,
    pub member_ids: Vec<String>,
    pub size: usize,
    pub growth_rate: f64,
    pub entropy: f64,
    pub mean_confidence: f64,
    pub unique_author_ratio: f64,
    pub mean_timestamp: f64,
    pub reason: SelectionReason,
    /// The ten most frequent terms, count-descending.
    pub top_terms: Vec<(String, u64)>,
}

/// Shannon entropy (natural log) of the thread's term distribution.
pub fn event_entropy(thread: &Thread) -> Result<f64> {
    let total = thread.total_terms();
    if total == 0 {
        return Err(Error::InvalidInput(format!(
            "thread {} has an empty term multiset",
            thread.thread_id
        )));
    }
    let n = total as f64;
    Ok(thread
        .term_counts()
        .values()
        .map(|&count| {
            let p = count as f64 / n;
            -p * p.ln()
        })
        .sum())
}

/// Net increase in arrival count between the last horizon and the one
/// before it: arrivals in `[now - horizon, now]` minus arrivals in
/// `[now - 2*horizon, now - horizon)`.
pub fn growth_rate(thread: &Thread, now: i64, horizon: i64) -> f64 {
    let recent = thread.arrivals_between(now - horizon, now, true);
    let previous = thread.arrivals_between(now - 2 * horizon, now - horizon, false);
    recent as f64 - previous as f64
}

fn passes_filters(thread: &Thread, cfg: &RankingConfig, now: i64) -> bool {
    thread.size() > cfg.min_size
        && thread.mean_confidence() >= cfg.min_mean_confidence
        && thread.mean_timestamp() >= (now - cfg.recency_window) as f64
        && thread.unique_author_ratio() >= cfg.min_unique_author_ratio
}

fn top_terms(thread: &Thread, k: usize) -> Vec<(String, u64)> {
    let mut terms: Vec<(String, u64)> = thread
        .term_counts()
        .iter()
        .map(|(t, &c)| (t.clone(), c))
        .collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    terms.truncate(k);
    terms
}

/// Selects and orders candidate events from the thread population.
///
/// Steps: filter cascade, union of the top-k by size and top-k by positive
/// growth (size wins the tag when a thread qualifies both ways), entropy
/// floor, then the `final_k` highest-entropy candidates ordered by entropy
/// descending with ties broken by size and thread id.
pub fn select_candidates(
    threads: &[Thread],
    cfg: &RankingConfig,
    now: i64,
) -> Vec<CandidateEvent> {
    let survivors: Vec<&Thread> = threads
        .iter()
        .filter(|t| passes_filters(t, cfg, now))
        .collect();

    let mut by_size = survivors.clone();
    by_size.sort_by(|a, b| {
        b.size()
            .cmp(&a.size())
            .then_with(|| a.thread_id.cmp(&b.thread_id))
    });
    by_size.truncate(cfg.top_k_size);

    let mut by_growth: Vec<(&Thread, f64)> = survivors
        .iter()
        .map(|t| (*t, growth_rate(t, now, cfg.growth_horizon)))
        .filter(|(_, g)| *g > 0.0)
        .collect();
    by_growth.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("growth rates are finite")
            .then_with(|| b.0.size().cmp(&a.0.size()))
            .then_with(|| a.0.thread_id.cmp(&b.0.thread_id))
    });
    by_growth.truncate(cfg.top_k_growth);

    // Union, deduplicated by thread id; BySize wins the tag on overlap.
    let mut pool: std::collections::BTreeMap<ThreadId, (&Thread, SelectionReason)> =
        std::collections::BTreeMap::new();
    for (thread, _) in &by_growth {
        pool.insert(thread.thread_id, (thread, SelectionReason::ByGrowth));
    }
    for thread in &by_size {
        pool.insert(thread.thread_id, (thread, SelectionReason::BySize));
    }

    let mut candidates: Vec<CandidateEvent> = pool
        .into_values()
        .filter_map(|(thread, reason)| {
            let entropy = event_entropy(thread).unwrap_or(0.0);
            if entropy < cfg.min_entropy {
                return None;
            }
            Some(CandidateEvent {
                thread_id: thread.thread_id,
                member_ids: thread.member_ids(),
                size: thread.size(),
                growth_rate: growth_rate(thread, now, cfg.growth_horizon),
                entropy,
                mean_confidence: thread.mean_confidence(),
                unique_author_ratio: thread.unique_author_ratio(),
                mean_timestamp: thread.mean_timestamp(),
                reason,
                top_terms: top_terms(thread, 10),
            })
        })
        .collect();

    candidates.sort_by(|a, b| {
        b.entropy
            .partial_cmp(&a.entropy)
            .expect("entropies are finite")
            .then_with(|| b.size.cmp(&a.size))
            .then_with(|| a.thread_id.cmp(&b.thread_id))
    });
    candidates.truncate(cfg.final_k);
    candidates
}

/// Writes the candidate report: one row per candidate with score
/// components and the top terms as a comma-joined list.
pub fn write_candidate_report(path: &Path, candidates: &[CandidateEvent]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(
        out,
        "thread_id\tsize\tentropy\tgrowth\tmean_confidence\tunique_author_ratio\treason\ttop_terms"
    )
    .map_err(|e| Error::io(path, e))?;
    for c in candidates {
        let terms: Vec<String> = c
            .top_terms
            .iter()
            .map(|(t, n)| format!("{t}:{n}"))
            .collect();
        writeln!(
            out,
            "{}\t{}\t{:.4}\t{:.1}\t{:.4}\t{:.4}\t{}\t{}",
            c.thread_id,
            c.size,
            c.entropy,
            c.growth_rate,
            c.mean_confidence,
            c.unique_author_ratio,
            c.reason,
            terms.join(",")
        )
        .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
