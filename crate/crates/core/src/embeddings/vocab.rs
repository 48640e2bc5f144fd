use std::cmp::Reverse;
use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::EmbeddingError;
use crate::rng::Rng;

pub const NEGATIVE_TABLE_SIZE: usize = 10_000_000;
const UNIGRAM_POWER: f64 = 0.75;

/// Tokens kept after the `min_count` threshold, most frequent first (ties by
/// token), with their corpus counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    corpus_tokens: u64,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
    counts: Vec<u64>,
    corpus_tokens: u64,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self {
            tokens: r.tokens,
            counts: r.counts,
            index,
            corpus_tokens: r.corpus_tokens,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        Self {
            tokens: v.tokens,
            counts: v.counts,
            corpus_tokens: v.corpus_tokens,
        }
    }
}

impl Vocabulary {
    pub fn build<'a, I>(docs: I, min_count: u64) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        let mut corpus_tokens = 0u64;
        for doc in docs {
            for t in doc {
                *counts.entry(t.as_str()).or_insert(0) += 1;
                corpus_tokens += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        if kept.is_empty() {
            return Err(EmbeddingError::EmptyVocabulary { min_count });
        }
        kept.sort_unstable_by_key(|&(t, c)| (Reverse(c), t));
        Ok(VocabularyRepr {
            tokens: kept.iter().map(|(t, _)| (*t).to_owned()).collect(),
            counts: kept.iter().map(|&(_, c)| c).collect(),
            corpus_tokens,
        }
        .into())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn corpus_tokens(&self) -> u64 {
        self.corpus_tokens
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    /// Ids of the in-vocabulary tokens of `doc`, in order.
    pub fn encode(&self, doc: &[String]) -> Vec<u32> {
        doc.iter().filter_map(|t| self.id(t)).collect()
    }
}

/// Lookup table for drawing negatives with probability proportional to
/// `count^0.75`.
#[derive(Debug, Clone)]
pub struct NegativeTable {
    table: Vec<u32>,
}

impl NegativeTable {
    pub fn new(vocab: &Vocabulary) -> Self {
        Self::with_size(vocab, NEGATIVE_TABLE_SIZE)
    }

    pub fn with_size(vocab: &Vocabulary, size: usize) -> Self {
        let weights: Vec<f64> = vocab
            .counts()
            .iter()
            .map(|&c| (c as f64).powf(UNIGRAM_POWER))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut table = Vec::with_capacity(size);
        let mut word = 0usize;
        let mut cumulative = weights[0] / total;
        for slot in 0..size {
            table.push(word as u32);
            if (slot + 1) as f64 / size as f64 > cumulative && word + 1 < weights.len() {
                word += 1;
                cumulative += weights[word] / total;
            }
        }
        Self { table }
    }

    #[inline]
    pub fn sample(&self, rng: &mut Rng) -> u32 {
        self.table[rng.random_range(0..self.table.len())]
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn slots_of(&self, id: u32) -> usize {
        self.table.iter().filter(|&&t| t == id).count()
    }
}
