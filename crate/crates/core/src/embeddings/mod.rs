//! Word embeddings (skip-gram with negative sampling), pretrained vector
//! files, averaged document vectors and distributed-memory paragraph vectors.
//!
//! Training is single-threaded and consumes one seeded PRNG stream, so a
//! trained model is a pure function of its corpus and [`EmbeddingParams`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

mod doc2vec;
mod io;
mod sgns;
mod vocab;

pub use doc2vec::{infer_doc_vector, train_doc2vec, Doc2VecModel};
pub use io::{load_pretrained, read_embedding, write_embedding};
pub use sgns::{sgns_gradients, sgns_loss, train_word_embedding, SgnsGradients};
pub use vocab::{NegativeTable, Vocabulary, NEGATIVE_TABLE_SIZE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub dim: usize,
    /// Context radius in tokens.
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    /// Negative samples per positive pair.
    pub negatives: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub seed: u64,
}

impl EmbeddingParams {
    /// Skip-gram defaults: window 5, min count 10, 5 epochs, 5 negatives,
    /// learning rate 0.025 decaying linearly to 0.0001.
    pub fn word2vec(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            window: 5,
            min_count: 10,
            epochs: 5,
            negatives: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            seed,
        }
    }

    /// Paragraph-vector defaults: window 15, min count 10, 20 epochs.
    pub fn doc2vec(dim: usize, seed: u64) -> Self {
        Self {
            window: 15,
            epochs: 20,
            ..Self::word2vec(dim, seed)
        }
    }

    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |msg: &str| Err(EmbeddingError::InvalidParams(msg.to_owned()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.min_count == 0 {
            return bad("min_count must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1");
        }
        if !(self.lr_start > self.lr_end && self.lr_end > 0.0) {
            return bad("learning rates must satisfy lr_start > lr_end > 0");
        }
        Ok(())
    }

    /// Learning rate after `progress` (0 to 1) of all updates.
    pub(crate) fn learning_rate(&self, progress: f64) -> f64 {
        self.lr_start - (self.lr_start - self.lr_end) * progress.clamp(0.0, 1.0)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("invalid embedding parameters: {0}")]
    InvalidParams(String),
    #[error("no token occurs at least {min_count} times")]
    EmptyVocabulary { min_count: u64 },
    #[error("embedding file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("embedding file line {line}: expected {expected} components, found {found}")]
    Dimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("embedding file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("embedding file line {line}: duplicate token {token:?}")]
    DuplicateToken { line: usize, token: String },
    #[error("embedding file has no vectors")]
    Empty,
}

/// A token-to-vector map.
#[derive(Debug, Clone, PartialEq)]
pub struct WordEmbedding {
    dim: usize,
    tokens: Vec<String>,
    vectors: Vec<f64>,
    index: HashMap<String, usize>,
    /// Training parameters; `None` for embeddings read from a file.
    pub params: Option<EmbeddingParams>,
    pub corpus_token_count: u64,
}

impl WordEmbedding {
    /// `vectors` is row-major, one row of `dim` values per token.
    pub fn new(dim: usize, tokens: Vec<String>, vectors: Vec<f64>) -> Self {
        assert_eq!(tokens.len() * dim, vectors.len(), "one row per token");
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            dim,
            tokens,
            vectors,
            index,
            params: None,
            corpus_token_count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors_all_finite(&self) -> bool {
        self.vectors.iter().all(|v| v.is_finite())
    }
}

/// Mean of the vectors of in-vocabulary tokens, counted with multiplicity.
/// Out-of-vocabulary tokens are skipped; if none remain the result is zero.
pub fn average_doc_vector(tokens: &[String], emb: &WordEmbedding) -> Vec<f64> {
    let mut sum = vec![0.0; emb.dim()];
    let mut n = 0usize;
    for v in tokens.iter().filter_map(|t| emb.get(t)) {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        n += 1;
    }
    if n > 0 {
        let inv = 1.0 / n as f64;
        sum.iter_mut().for_each(|s| *s *= inv);
    }
    sum
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-log sigmoid(-x)`, evaluated without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// d(loss)/d(score) for one logistic target: `sigmoid(score) - label`.
#[inline]
pub(crate) fn logistic_coef(score: f64, positive: bool) -> f64 {
    sigmoid(score) - if positive { 1.0 } else { 0.0 }
}

pub(crate) fn uniform_init(rng: &mut crate::rng::Rng, n: usize, dim: usize) -> Vec<f64> {
    use rand::Rng as _;
    let half = 0.5 / dim as f64;
    (0..n * dim).map(|_| rng.random_range(-half..half)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn ab() -> WordEmbedding {
        WordEmbedding::new(2, toks(&["a", "b"]), vec![1.0, 0.0, 0.0, 1.0])
    }

    #[test]
    fn averages() {
        assert_eq!(average_doc_vector(&toks(&["a", "b"]), &ab()), vec![0.5, 0.5]);
        assert_eq!(average_doc_vector(&toks(&["x", "y"]), &ab()), vec![0.0, 0.0]);
        let v = average_doc_vector(&toks(&["a", "a", "b", "zz"]), &ab());
        assert!((v[0] - 2.0 / 3.0).abs() < 1e-15 && (v[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(average_doc_vector(&[], &ab()), vec![0.0, 0.0]);
    }

    #[test]
    fn param_validation() {
        assert!(EmbeddingParams::word2vec(100, 1).validate().is_ok());
        let d = EmbeddingParams::doc2vec(200, 1);
        assert_eq!((d.window, d.min_count, d.epochs), (15, 10, 20));
        let mut p = EmbeddingParams::word2vec(10, 1);
        p.lr_end = p.lr_start;
        assert!(p.validate().is_err());
        let mut p = EmbeddingParams::word2vec(10, 1);
        p.window = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn stable_logistics() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!(softplus(-800.0) >= 0.0);
    }

    #[test]
    fn learning_rate_is_linear() {
        let p = EmbeddingParams::word2vec(10, 1);
        assert_eq!(p.learning_rate(0.0), 0.025);
        assert!((p.learning_rate(1.0) - 0.0001).abs() < 1e-15);
        assert!((p.learning_rate(0.5) - 0.01255).abs() < 1e-15);
    }
}
