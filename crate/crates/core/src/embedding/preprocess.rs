//! Text-to-token preprocessing.
//!
//! Two profiles exist because classification and clustering want different
//! token streams. Classification keeps case and stopwords and replaces
//! mentions, URLs and numbers with placeholder tokens. Clustering is more
//! aggressive: it lowercases, drops URL tokens entirely, strips `#` from
//! hashtags, and removes stopwords.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreprocessMode {
    Classification,
    Clustering,
}

/// Settings for one preprocessing pass.
#[derive(Debug, Clone)]
pub struct PreprocessProfile {
    pub mode: PreprocessMode,
    pub mention_token: String,
    pub url_token: String,
    pub number_token: String,
    /// Consulted in `Clustering` mode only; must be lowercase entries.
    pub stopwords: HashSet<String>,
    /// Always true in `Clustering` mode.
    pub lowercase: bool,
}

impl PreprocessProfile {
    pub fn classification() -> Self {
        Self {
            mode: PreprocessMode::Classification,
            mention_token: "MENTION".into(),
            url_token: "URL".into(),
            number_token: "NUMBER".into(),
            stopwords: HashSet::new(),
            lowercase: false,
        }
    }

    pub fn clustering(stopwords: HashSet<String>) -> Self {
        Self {
            mode: PreprocessMode::Clustering,
            mention_token: "MENTION".into(),
            url_token: "URL".into(),
            number_token: "NUMBER".into(),
            stopwords,
            lowercase: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == PreprocessMode::Clustering && (!self.lowercase || self.stopwords.is_empty())
        {
            return Err(Error::InvalidInput(
                "clustering preprocessing requires lowercasing and a non-empty stopword set"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// The bundled English stopword list.
pub fn default_stopwords() -> HashSet<String> {
    BUNDLED_STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Loads a stopword file: one token per line, UTF-8.
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut set = HashSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let token = line.trim();
        if !token.is_empty() {
            set.insert(token.to_string());
        }
    }
    if set.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: stopword file has no entries",
            path.display()
        )));
    }
    Ok(set)
}

/// Tokenizes `text` under the given profile. May return an empty sequence.
pub fn preprocess(text: &str, profile: &PreprocessProfile) -> Vec<String> {
    let clustering = profile.mode == PreprocessMode::Clustering;
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        if is_url(raw) {
            if !clustering {
                out.push(profile.url_token.clone());
            }
            continue;
        }
        if is_mention(raw) {
            out.push(profile.mention_token.clone());
            continue;
        }
        let stripped = strip_edges(raw, clustering);
        if stripped.is_empty() {
            continue;
        }
        if is_number(stripped) {
            out.push(profile.number_token.clone());
            continue;
        }
        if clustering {
            let lowered = stripped.to_lowercase();
            if profile.stopwords.contains(&lowered) {
                continue;
            }
            out.push(lowered);
        } else {
            out.push(stripped.to_string());
        }
    }
    out
}

fn is_url(token: &str) -> bool {
    let lower = token.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

fn is_mention(token: &str) -> bool {
    token.starts_with('@') && token.len() > 1
}

/// Strips punctuation from token edges. Hashtags are kept verbatim for
/// classification; for clustering the leading `#` is stripped so the word
/// itself survives.
fn strip_edges(token: &str, strip_hash: bool) -> &str {
    let trimmed = token.trim_end_matches(|c: char| c.is_ascii_punctuation());
    trimmed.trim_start_matches(|c: char| {
        c.is_ascii_punctuation() && (strip_hash || c != '#')
    })
}

/// Integer or decimal, optionally signed.
fn is_number(token: &str) -> bool {
    let body = token.strip_prefix(['+', '-']).unwrap_or(token);
    if body.is_empty() {
        return false;
    }
    let mut parts = body.splitn(2, '.');
    let int_part = parts.next().expect("splitn yields at least one part");
    let frac_part = parts.next();
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    all_digits(int_part) && frac_part.is_none_or(all_digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clustering_profile() -> PreprocessProfile {
        PreprocessProfile::clustering(default_stopwords())
    }

    #[test]
    fn classification_keeps_case_and_stopwords() {
        let tokens = preprocess(
            "Police officer shot in bank robbery",
            &PreprocessProfile::classification(),
        );
        assert_eq!(tokens, ["Police", "officer", "shot", "in", "bank", "robbery"]);
    }

    #[test]
    fn classification_replaces_mentions_urls_numbers() {
        let tokens = preprocess(
            "@user check http://a.b NOW 42",
            &PreprocessProfile::classification(),
        );
        assert_eq!(tokens, ["MENTION", "check", "URL", "NOW", "NUMBER"]);
    }

    #[test]
    fn clustering_lowercases_and_drops_stopwords() {
        let tokens = preprocess("The THE the", &clustering_profile());
        assert!(tokens.is_empty());
    }

    #[test]
    fn clustering_drops_urls_and_strips_hashtags() {
        let tokens = preprocess("BREAKING #Fire https://x.co downtown", &clustering_profile());
        assert_eq!(tokens, ["breaking", "fire", "downtown"]);
    }

    #[test]
    fn classification_keeps_hashtags_verbatim() {
        let tokens = preprocess("#Fire downtown!", &PreprocessProfile::classification());
        assert_eq!(tokens, ["#Fire", "downtown"]);
    }

    #[test]
    fn numbers_with_signs_and_decimals() {
        let profile = PreprocessProfile::classification();
        assert_eq!(preprocess("-3.5", &profile), ["NUMBER"]);
        assert_eq!(preprocess("+7", &profile), ["NUMBER"]);
        assert_eq!(preprocess("3.5.1", &profile), ["3.5.1"]);
        assert_eq!(preprocess("4pm", &profile), ["4pm"]);
    }

    #[test]
    fn edge_punctuation_is_stripped() {
        let profile = PreprocessProfile::classification();
        assert_eq!(preprocess("(word),", &profile), ["word"]);
        assert_eq!(preprocess("(42)", &profile), ["NUMBER"]);
    }

    #[test]
    fn clustering_profile_invariant() {
        let mut profile = clustering_profile();
        assert!(profile.validate().is_ok());
        profile.stopwords.clear();
        assert!(profile.validate().is_err());
    }

    #[test]
    fn bundled_stopwords_nonempty_and_lowercase() {
        let words = default_stopwords();
        assert!(words.len() >= 100);
        assert!(words.contains("the"));
        assert!(words.iter().all(|w| w.chars().all(|c| !c.is_uppercase())));
    }
}
