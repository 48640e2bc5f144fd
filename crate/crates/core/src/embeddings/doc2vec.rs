use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{
    axpy, dot, logistic_coef, uniform_init, EmbeddingError, EmbeddingParams, NegativeTable,
    Vocabulary,
};
use crate::rng::{self, Rng};
use crate::text::TokenSequence;

/// Distributed-memory paragraph vectors.
///
/// The hidden vector for each prediction is the mean of the document vector
/// and the context word vectors. As in the reference CBOW implementation, the
/// error on that mean is applied undivided to every input vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Doc2VecModel {
    pub params: EmbeddingParams,
    vocab: Vocabulary,
    word_vectors: Vec<f64>,
    output_weights: Vec<f64>,
    doc_ids: Vec<String>,
    doc_vectors: Vec<f64>,
    #[serde(skip)]
    table: OnceLock<NegativeTable>,
}

impl PartialEq for Doc2VecModel {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.vocab == other.vocab
            && self.word_vectors == other.word_vectors
            && self.output_weights == other.output_weights
            && self.doc_ids == other.doc_ids
            && self.doc_vectors == other.doc_vectors
    }
}

impl Doc2VecModel {
    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_vector(&self, doc_id: &str) -> Option<&[f64]> {
        let d = self.dim();
        self.doc_ids
            .iter()
            .position(|id| id == doc_id)
            .map(|i| &self.doc_vectors[i * d..(i + 1) * d])
    }

    pub fn doc_vector_at(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.doc_vectors[i * d..(i + 1) * d]
    }

    pub fn word_vector(&self, token: &str) -> Option<&[f64]> {
        let d = self.dim();
        self.vocab
            .id(token)
            .map(|i| &self.word_vectors[i as usize * d..(i as usize + 1) * d])
    }

    fn table(&self) -> &NegativeTable {
        self.table.get_or_init(|| NegativeTable::new(&self.vocab))
    }

    pub fn all_finite(&self) -> bool {
        self.word_vectors
            .iter()
            .chain(&self.output_weights)
            .chain(&self.doc_vectors)
            .all(|v| v.is_finite())
    }
}

/// Sum of the context word vectors around each position, and how many there
/// were.
struct Context {
    sum: Vec<f64>,
    count: usize,
}

fn window_range(i: usize, len: usize, window: usize) -> impl Iterator<Item = usize> {
    let lo = i.saturating_sub(window);
    let hi = (i + window).min(len - 1);
    (lo..=hi).filter(move |&j| j != i)
}

/// Scores `target` and sampled negatives against `hidden`. Leaves the error
/// with respect to `hidden` in `grad` and the per-target loss derivatives in
/// `hits`.
#[allow(clippy::too_many_arguments)]
fn score_targets(
    output: &[f64],
    dim: usize,
    hidden: &[f64],
    target: u32,
    table: &NegativeTable,
    negatives: usize,
    rng: &mut Rng,
    grad: &mut [f64],
    hits: &mut Vec<(u32, f64)>,
) {
    grad.iter_mut().for_each(|g| *g = 0.0);
    hits.clear();
    let mut visit = |t: u32, positive: bool| {
        let o = t as usize * dim;
        let u = &output[o..o + dim];
        let coef = logistic_coef(dot(u, hidden), positive);
        axpy(coef, u, grad);
        hits.push((t, coef));
    };
    visit(target, true);
    for _ in 0..negatives {
        let n = table.sample(rng);
        if n != target {
            visit(n, false);
        }
    }
}

pub fn train_doc2vec(
    corpus: &[(String, TokenSequence)],
    params: &EmbeddingParams,
) -> Result<Doc2VecModel, EmbeddingError> {
    params.validate()?;
    let vocab = Vocabulary::build(corpus.iter().map(|(_, s)| s.tokens.as_slice()), params.min_count)?;
    let table = NegativeTable::new(&vocab);
    let docs: Vec<Vec<u32>> = corpus.iter().map(|(_, s)| vocab.encode(&s.tokens)).collect();

    let dim = params.dim;
    let mut rng = rng::rng(params.seed);
    let mut words = uniform_init(&mut rng, vocab.len(), dim);
    let mut doc_vectors = uniform_init(&mut rng, docs.len(), dim);
    let mut output = vec![0.0; vocab.len() * dim];
    let mut hidden = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut hits = Vec::with_capacity(params.negatives + 1);

    let per_epoch: usize = docs.iter().map(Vec::len).sum();
    let total = (per_epoch * params.epochs).max(1) as f64;
    let mut processed = 0usize;
    for _ in 0..params.epochs {
        for (k, doc) in docs.iter().enumerate() {
            let dv = k * dim;
            for (i, &target) in doc.iter().enumerate() {
                let lr = params.learning_rate(processed as f64 / total);
                processed += 1;
                hidden.copy_from_slice(&doc_vectors[dv..dv + dim]);
                let mut count = 1;
                for j in window_range(i, doc.len(), params.window) {
                    let w = doc[j] as usize * dim;
                    axpy(1.0, &words[w..w + dim], &mut hidden);
                    count += 1;
                }
                let inv = 1.0 / count as f64;
                hidden.iter_mut().for_each(|h| *h *= inv);
                score_targets(
                    &output,
                    dim,
                    &hidden,
                    target,
                    &table,
                    params.negatives,
                    &mut rng,
                    &mut grad,
                    &mut hits,
                );
                for &(t, coef) in &hits {
                    let o = t as usize * dim;
                    axpy(-lr * coef, &hidden, &mut output[o..o + dim]);
                }
                axpy(-lr, &grad, &mut doc_vectors[dv..dv + dim]);
                for j in window_range(i, doc.len(), params.window) {
                    let w = doc[j] as usize * dim;
                    axpy(-lr, &grad, &mut words[w..w + dim]);
                }
            }
        }
    }

    let model = Doc2VecModel {
        params: params.clone(),
        vocab,
        word_vectors: words,
        output_weights: output,
        doc_ids: corpus.iter().map(|(id, _)| id.clone()).collect(),
        doc_vectors,
        table: OnceLock::new(),
    };
    let _ = model.table.set(table);
    Ok(model)
}

/// Fits a fresh document vector against the frozen word and output weights
/// for `params.epochs` passes. The starting vector and the negative draws
/// come from `seed`; a document without in-vocabulary tokens keeps its
/// starting vector.
pub fn infer_doc_vector(model: &Doc2VecModel, doc: &TokenSequence, seed: u64) -> Vec<f64> {
    let params = &model.params;
    let dim = params.dim;
    let mut rng = rng::rng(seed);
    let mut d = uniform_init(&mut rng, 1, dim);
    let ids = model.vocab.encode(&doc.tokens);
    if ids.is_empty() {
        return d;
    }
    let contexts: Vec<Context> = (0..ids.len())
        .map(|i| {
            let mut sum = vec![0.0; dim];
            let mut count = 0;
            for j in window_range(i, ids.len(), params.window) {
                let w = ids[j] as usize * dim;
                axpy(1.0, &model.word_vectors[w..w + dim], &mut sum);
                count += 1;
            }
            Context { sum, count }
        })
        .collect();

    let table = model.table();
    let mut hits = Vec::with_capacity(params.negatives + 1);
    let mut hidden = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let total = (ids.len() * params.epochs) as f64;
    let mut processed = 0usize;
    for _ in 0..params.epochs {
        for (i, &target) in ids.iter().enumerate() {
            let lr = params.learning_rate(processed as f64 / total);
            processed += 1;
            let ctx = &contexts[i];
            let inv = 1.0 / (ctx.count + 1) as f64;
            for ((h, a), b) in hidden.iter_mut().zip(&d).zip(&ctx.sum) {
                *h = (a + b) * inv;
            }
            score_targets(
                &model.output_weights,
                dim,
                &hidden,
                target,
                table,
                params.negatives,
                &mut rng,
                &mut grad,
                &mut hits,
            );
            axpy(-lr, &grad, &mut d);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::cosine;
    use crate::parser::SectionKind;
    use crate::text::TokenSource;
    use rand::Rng as _;

    fn seq(id: &str, tokens: Vec<String>) -> TokenSequence {
        TokenSequence::new(
            tokens,
            TokenSource {
                doc_id: id.into(),
                section: SectionKind::Facts,
                stopwords_removed: false,
            },
        )
    }

    /// Two topics with disjoint vocabularies, optionally on top of a shared
    /// background vocabulary; each document leans on a handful of favourite
    /// topic words. Without shared words the context alone gives the topic
    /// away and the document vectors have nothing topical left to learn.
    fn topic_corpus(seed: u64, docs_per_topic: usize, shared: f64) -> Vec<(String, TokenSequence)> {
        let mut r = rng::rng(seed);
        let mut out = Vec::new();
        for topic in 0..2 {
            let vocab: Vec<String> = (0..40).map(|w| format!("t{topic}w{w}")).collect();
            for n in 0..docs_per_topic {
                let favourites: Vec<usize> = (0..4).map(|_| r.random_range(0..40)).collect();
                let tokens = (0..200)
                    .map(|_| {
                        if r.random_bool(shared) {
                            format!("shared{}", r.random_range(0..60))
                        } else if r.random_bool(0.6) {
                            vocab[favourites[r.random_range(0..4)]].clone()
                        } else {
                            vocab[r.random_range(0..40)].clone()
                        }
                    })
                    .collect();
                let id = format!("doc{topic}-{n}");
                out.push((id.clone(), seq(&id, tokens)));
            }
        }
        out
    }

    fn small_params(seed: u64) -> EmbeddingParams {
        EmbeddingParams::doc2vec(24, seed)
    }

    #[test]
    fn topics_separate() {
        for seed in 0..3 {
            let corpus = topic_corpus(seed + 100, 30, 0.7);
            let model = train_doc2vec(&corpus, &small_params(seed)).unwrap();
            let topic = |i: usize| i / 30;
            let (mut within, mut nw, mut cross, mut nc) = (0.0, 0, 0.0, 0);
            for i in 0..60 {
                for j in i + 1..60 {
                    let c = cosine(model.doc_vector_at(i), model.doc_vector_at(j));
                    if topic(i) == topic(j) {
                        within += c;
                        nw += 1;
                    } else {
                        cross += c;
                        nc += 1;
                    }
                }
            }
            let (within, cross) = (within / nw as f64, cross / nc as f64);
            assert!(within > cross, "seed {seed}: within {within} cross {cross}");
        }
    }

    #[test]
    fn inference_recovers_training_vectors() {
        let corpus = topic_corpus(5, 30, 0.0);
        let model = train_doc2vec(&corpus, &small_params(1)).unwrap();
        let n = corpus.len();
        let mut passed = 0;
        for (k, (id, doc)) in corpus.iter().enumerate() {
            let v = infer_doc_vector(&model, doc, rng::derive_seed_str(1, id));
            let own = cosine(&v, model.doc_vector_at(k));
            let beaten = (0..n)
                .filter(|&j| j != k && cosine(&v, model.doc_vector_at(j)) < own)
                .count();
            if beaten as f64 > 0.9 * (n - 1) as f64 {
                passed += 1;
            }
        }
        assert!(passed as f64 >= 0.9 * n as f64, "{passed} of {n} documents ranked their own vector first-decile");
    }

    #[test]
    fn every_document_gets_a_vector_and_training_is_deterministic() {
        let corpus = topic_corpus(8, 6, 0.5);
        let a = train_doc2vec(&corpus, &small_params(3)).unwrap();
        let b = train_doc2vec(&corpus, &small_params(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.all_finite());
        for (id, _) in &corpus {
            assert_eq!(a.doc_vector(id).unwrap().len(), 24);
        }
        let json = serde_json::to_string(&a).unwrap();
        let back: Doc2VecModel = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
        let doc = &corpus[0].1;
        assert_eq!(infer_doc_vector(&a, doc, 4), infer_doc_vector(&back, doc, 4));
    }

    #[test]
    fn out_of_vocabulary_documents_keep_their_start() {
        let corpus = topic_corpus(8, 6, 0.5);
        let model = train_doc2vec(&corpus, &small_params(3)).unwrap();
        let oov = seq("x", vec!["zzz".into(), "qqq".into()]);
        let v = infer_doc_vector(&model, &oov, 77);
        let mut r = rng::rng(77);
        assert_eq!(v, uniform_init(&mut r, 1, 24));
        assert_eq!(infer_doc_vector(&model, &corpus[3].1, 9), infer_doc_vector(&model, &corpus[3].1, 9));
    }
}
