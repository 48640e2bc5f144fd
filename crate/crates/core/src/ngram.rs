//! Top-k n-gram vocabularies, count vectors and min-max scaling.
//!
//! "Most frequent" means total occurrence count over the training documents.
//! Ties are broken by comparing the n-grams as token sequences, ascending.
//! N-grams never span two documents.

use std::cmp::{Ordering, Reverse};
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;
use crate::text::TokenSequence;

pub const NGRAM_MIN: usize = 1;
pub const NGRAM_MAX: usize = 4;
pub const VOCAB_CAPACITY: usize = 2000;

const UNUSED: u32 = u32::MAX;
const UNKNOWN: u32 = u32::MAX - 1;

type Key = [u32; NGRAM_MAX];

/// Calls `f` with the key of every contiguous n-gram (n = 1..=4) of `ids`.
fn for_each_ngram(ids: &[u32], mut f: impl FnMut(Key)) {
    for start in 0..ids.len() {
        let mut key = [UNUSED; NGRAM_MAX];
        for n in 0..NGRAM_MAX.min(ids.len() - start) {
            key[n] = ids[start + n];
            f(key);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub ngram: Vec<String>,
    pub train_count: u64,
}

/// The selected n-grams in column order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "Vec<VocabEntry>", into = "Vec<VocabEntry>")]
pub struct NgramVocabulary {
    entries: Vec<VocabEntry>,
    token_ids: HashMap<String, u32>,
    columns: HashMap<Key, usize>,
}

impl PartialEq for NgramVocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl From<Vec<VocabEntry>> for NgramVocabulary {
    fn from(entries: Vec<VocabEntry>) -> Self {
        let mut token_ids = HashMap::new();
        let mut columns = HashMap::with_capacity(entries.len());
        for (col, entry) in entries.iter().enumerate() {
            let mut key = [UNUSED; NGRAM_MAX];
            for (slot, token) in entry.ngram.iter().enumerate() {
                let next = token_ids.len() as u32;
                key[slot] = *token_ids.entry(token.clone()).or_insert(next);
            }
            columns.insert(key, col);
        }
        Self {
            entries,
            token_ids,
            columns,
        }
    }
}

impl From<NgramVocabulary> for Vec<VocabEntry> {
    fn from(v: NgramVocabulary) -> Self {
        v.entries
    }
}

impl NgramVocabulary {
    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Column labels: tokens joined by single spaces.
    pub fn column_names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.ngram.join(" ")).collect()
    }

    fn encode(&self, doc: &TokenSequence) -> Vec<u32> {
        doc.tokens
            .iter()
            .map(|t| self.token_ids.get(t).copied().unwrap_or(UNKNOWN))
            .collect()
    }
}

/// Keeps the `VOCAB_CAPACITY` most frequent 1- to 4-grams of the documents.
pub fn build_vocab(train_docs: &[TokenSequence]) -> NgramVocabulary {
    build_vocab_with_capacity(train_docs, VOCAB_CAPACITY)
}

pub fn build_vocab_with_capacity(train_docs: &[TokenSequence], capacity: usize) -> NgramVocabulary {
    let mut interner: HashMap<&str, u32> = HashMap::new();
    let mut tokens: Vec<&str> = Vec::new();
    let mut counts: HashMap<Key, u64> = HashMap::new();
    let mut ids = Vec::new();
    for doc in train_docs {
        ids.clear();
        for t in &doc.tokens {
            let id = *interner.entry(t.as_str()).or_insert_with(|| {
                tokens.push(t.as_str());
                (tokens.len() - 1) as u32
            });
            ids.push(id);
        }
        for_each_ngram(&ids, |key| *counts.entry(key).or_insert(0) += 1);
    }

    let words = |key: &Key| {
        key.iter()
            .take_while(|&&id| id != UNUSED)
            .map(|&id| tokens[id as usize])
            .collect::<Vec<_>>()
    };
    let order = |a: &(Key, u64), b: &(Key, u64)| -> Ordering {
        Reverse(a.1)
            .cmp(&Reverse(b.1))
            .then_with(|| words(&a.0).cmp(&words(&b.0)))
    };
    let mut all: Vec<(Key, u64)> = counts.into_iter().collect();
    if all.len() > capacity && capacity > 0 {
        all.select_nth_unstable_by(capacity - 1, order);
    }
    all.truncate(capacity);
    all.sort_unstable_by(order);

    all.into_iter()
        .map(|(key, count)| VocabEntry {
            ngram: words(&key).into_iter().map(str::to_owned).collect(),
            train_count: count,
        })
        .collect::<Vec<_>>()
        .into()
}

/// Occurrence count of each vocabulary n-gram in `doc`.
pub fn count_vector(doc: &TokenSequence, vocab: &NgramVocabulary) -> Vec<f64> {
    let mut row = vec![0.0; vocab.len()];
    let ids = vocab.encode(doc);
    for_each_ngram(&ids, |key| {
        if let Some(&col) = vocab.columns.get(&key) {
            row[col] += 1.0;
        }
    });
    row
}

/// One count row per document, rows labelled with the documents' ids.
pub fn vectorize(docs: &[TokenSequence], vocab: &NgramVocabulary) -> FeatureMatrix {
    let mut values = Vec::with_capacity(docs.len() * vocab.len());
    for doc in docs {
        values.extend(count_vector(doc, vocab));
    }
    FeatureMatrix::new(
        docs.iter().map(|d| d.source.doc_id.clone()).collect(),
        vocab.column_names(),
        values,
    )
    .expect("counts are finite and shaped")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalingError {
    #[error("cannot fit a scaler on a matrix with no rows")]
    EmptyMatrix,
    #[error("scaler fitted on {expected} columns, matrix has {found}")]
    ColumnMismatch { expected: usize, found: usize },
}

/// Per-column minimum and maximum of a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_scaler(train: &FeatureMatrix) -> Result<MinMaxScaler, ScalingError> {
    if train.n_rows() == 0 {
        return Err(ScalingError::EmptyMatrix);
    }
    let mut min = train.row(0).to_vec();
    let mut max = min.clone();
    for row in train.rows().skip(1) {
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(MinMaxScaler { min, max })
}

/// `(v - min) / (max - min)`, or 0 for constant columns. Values outside the
/// fitted range are not clipped.
pub fn transform(m: &FeatureMatrix, scaler: &MinMaxScaler) -> Result<FeatureMatrix, ScalingError> {
    if m.n_cols() != scaler.min.len() {
        return Err(ScalingError::ColumnMismatch {
            expected: scaler.min.len(),
            found: m.n_cols(),
        });
    }
    let cols = m.n_cols();
    let values = m
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let j = i % cols;
            let (lo, hi) = (scaler.min[j], scaler.max[j]);
            if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                0.0
            }
        })
        .collect();
    Ok(FeatureMatrix::new(m.row_ids().to_vec(), m.column_names().to_vec(), values)
        .expect("scaling preserves shape and finiteness"))
}
