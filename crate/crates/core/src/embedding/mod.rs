//! Pretrained word-embedding tables and message vectorization.
//!
//! A message becomes a fixed-length feature vector by averaging the
//! embeddings of its tokens — either a plain mean ([`avg_vector`]) or an
//! IDF-weighted mean ([`idf_weighted_vector`]). Out-of-vocabulary tokens
//! contribute zero vectors but still count in the denominator, so heavily
//! OOV messages are diluted toward zero rather than dropped.

mod preprocess;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub use preprocess::{
    default_stopwords, load_stopwords, preprocess, PreprocessMode, PreprocessProfile,
};

/// Distance assigned whenever one of the operands is a zero vector.
///
/// A zero vector (an all-OOV message) has no direction, so it is treated as
/// maximally far from everything: it never attaches to an existing thread
/// and never registers as a duplicate.
pub const ZERO_VECTOR_DISTANCE: f64 = 2.0;

/// Vocabulary mapped to fixed-dimension dense vectors.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Builds a table, checking that every vector has the given dimension
    /// and that all components are finite.
    pub fn new(dimension: usize, entries: HashMap<String, Vec<f64>>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("embedding dimension must be > 0".into()));
        }
        if entries.is_empty() {
            return Err(Error::InvalidInput("embedding vocabulary is empty".into()));
        }
        for (token, vector) in &entries {
            if vector.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: vector.len(),
                });
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!(
                    "non-finite component in embedding for token `{token}`"
                )));
            }
        }
        Ok(Self { dimension, entries })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    /// Tokens in unspecified order; sort before using in any output path.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// An [`EmbeddingTable`] together with loader diagnostics.
#[derive(Debug)]
pub struct EmbeddingLoad {
    pub table: EmbeddingTable,
    /// Number of tokens that appeared more than once (last occurrence wins).
    pub duplicates: usize,
}

/// Loads a textual embedding file.
///
/// Format: an optional first header line `<vocab_size> <dimension>`, then
/// one line per token: `<token> <v1> <v2> ... <vd>`, space-separated. When
/// the header is absent the dimension is inferred from the first line.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingLoad> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut entries: HashMap<String, Vec<f64>> = HashMap::new();
    let mut dimension: Option<usize> = None;
    let mut duplicates = 0usize;

    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let first = parts.next().expect("non-empty line has a first field");
        let rest: Vec<&str> = parts.collect();

        // Header detection: exactly two integer fields on the first line.
        if line_no == 0 && dimension.is_none() && rest.len() == 1 {
            if let (Ok(_vocab), Ok(dim)) = (first.parse::<usize>(), rest[0].parse::<usize>()) {
                if dim == 0 {
                    return Err(Error::Format(format!(
                        "{}: header declares dimension 0",
                        path.display()
                    )));
                }
                dimension = Some(dim);
                continue;
            }
        }

        let values: Vec<f64> = rest
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| {
                Error::Format(format!(
                    "{}:{}: unparseable vector component",
                    path.display(),
                    line_no + 1
                ))
            })?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "{}:{}: non-finite vector component",
                path.display(),
                line_no + 1
            )));
        }

        match dimension {
            None => {
                if values.is_empty() {
                    return Err(Error::Format(format!(
                        "{}:{}: token without vector components",
                        path.display(),
                        line_no + 1
                    )));
                }
                dimension = Some(values.len());
            }
            Some(dim) => {
                if values.len() != dim {
                    return Err(Error::Format(format!(
                        "{}:{}: inconsistent vector length {} (expected {})",
                        path.display(),
                        line_no + 1,
                        values.len(),
                        dim
                    )));
                }
            }
        }

        if entries.insert(first.to_string(), values).is_some() {
            duplicates += 1;
        }
    }

    let dimension = dimension
        .ok_or_else(|| Error::Format(format!("{}: empty embedding file", path.display())))?;
    let table = EmbeddingTable::new(dimension, entries)?;
    Ok(EmbeddingLoad { table, duplicates })
}

/// Writes a table in the textual format read by [`load_embeddings`],
/// with a `<vocab_size> <dimension>` header. Tokens are sorted so the
/// output is byte-stable.
pub fn write_embeddings(path: &Path, table: &EmbeddingTable) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut tokens: Vec<&str> = table.tokens().collect();
    tokens.sort_unstable();
    writeln!(out, "{} {}", tokens.len(), table.dimension()).map_err(|e| Error::io(path, e))?;
    for token in tokens {
        let vector = table.get(token).expect("token comes from the table");
        write!(out, "{token}").map_err(|e| Error::io(path, e))?;
        for v in vector {
            write!(out, " {v:.6}").map_err(|e| Error::io(path, e))?;
        }
        writeln!(out).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Inverse-document-frequency weights computed from a training set.
#[derive(Debug, Clone)]
pub struct IdfTable {
    weights: HashMap<String, f64>,
    /// Weight used for tokens never seen in the training set.
    pub default_weight: f64,
    pub document_count: usize,
}

impl IdfTable {
    pub fn weight(&self, token: &str) -> f64 {
        self.weights.get(token).copied().unwrap_or(self.default_weight)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Computes smoothed IDF weights over tokenized training documents:
/// `weight(token) = ln((1 + D) / (1 + df(token))) + 1`, where `D` is the
/// document count and `df` the number of documents containing the token.
/// Unseen tokens get the `df = 0` weight. All weights are strictly positive.
pub fn compute_idf<D: AsRef<[String]>>(documents: &[D]) -> Result<IdfTable> {
    if documents.is_empty() {
        return Err(Error::InvalidInput("empty training set for IDF".into()));
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for doc in documents {
        let mut seen: Vec<&String> = doc.as_ref().iter().collect();
        seen.sort_unstable();
        seen.dedup();
        for token in seen {
            *df.entry(token.clone()).or_insert(0) += 1;
        }
    }
    let d = documents.len() as f64;
    let weights = df
        .into_iter()
        .map(|(token, count)| (token, ((1.0 + d) / (1.0 + count as f64)).ln() + 1.0))
        .collect();
    Ok(IdfTable {
        weights,
        default_weight: (1.0 + d).ln() + 1.0,
        document_count: documents.len(),
    })
}

/// Fixed-length dense feature vector for one message.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn zero(dimension: usize) -> Self {
        Self {
            values: vec![0.0; dimension],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// True iff every component is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Component-wise mean of the tokens' embeddings. OOV tokens contribute
/// zero vectors and still count in the denominator; an empty token sequence
/// yields the zero vector.
pub fn avg_vector(tokens: &[String], table: &EmbeddingTable) -> FeatureVector {
    let dim = table.dimension();
    if tokens.is_empty() {
        return FeatureVector::zero(dim);
    }
    let mut sum = vec![0.0f64; dim];
    for token in tokens {
        if let Some(vector) = table.get(token) {
            for (s, v) in sum.iter_mut().zip(vector) {
                *s += v;
            }
        }
    }
    let n = tokens.len() as f64;
    for s in &mut sum {
        *s /= n;
    }
    FeatureVector::new(sum)
}

/// IDF-weighted mean: `Σ w(token)·emb(token) / Σ w(token)`. OOV embeddings
/// are zero vectors but their weights still enter the denominator. A zero
/// total weight (no tokens) yields the zero vector.
pub fn idf_weighted_vector(
    tokens: &[String],
    table: &EmbeddingTable,
    idf: &IdfTable,
) -> FeatureVector {
    let dim = table.dimension();
    let mut sum = vec![0.0f64; dim];
    let mut total_weight = 0.0f64;
    for token in tokens {
        let w = idf.weight(token);
        total_weight += w;
        if let Some(vector) = table.get(token) {
            for (s, v) in sum.iter_mut().zip(vector) {
                *s += w * v;
            }
        }
    }
    if total_weight == 0.0 {
        return FeatureVector::zero(dim);
    }
    for s in &mut sum {
        *s /= total_weight;
    }
    FeatureVector::new(sum)
}

/// Cosine distance `1 − u·v / (‖u‖‖v‖)` in `[0, 2]`. If either vector is
/// zero the result is [`ZERO_VECTOR_DISTANCE`].
pub fn cosine_distance(u: &FeatureVector, v: &FeatureVector) -> Result<f64> {
    if u.dimension() != v.dimension() {
        return Err(Error::DimensionMismatch {
            expected: u.dimension(),
            actual: v.dimension(),
        });
    }
    Ok(cosine_distance_raw(
        u.values(),
        u.norm(),
        v.values(),
        v.norm(),
    ))
}

/// Distance on raw slices with precomputed norms. Callers guarantee equal
/// dimensions; this is the hot path shared by the clustering window scans.
#[inline]
pub(crate) fn cosine_distance_raw(u: &[f64], u_norm: f64, v: &[f64], v_norm: f64) -> f64 {
    if u_norm == 0.0 || v_norm == 0.0 {
        return ZERO_VECTOR_DISTANCE;
    }
    let dot = dot(u, v);
    (1.0 - dot / (u_norm * v_norm)).clamp(0.0, 2.0)
}

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = 0.0f64;
    for i in 0..u.len() {
        acc += u[i] * v[i];
    }
    acc
}
