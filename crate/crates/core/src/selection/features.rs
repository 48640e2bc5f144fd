//! Per-document feature sources and their per-fold materialisation.
//!
//! N-gram features keep the token sequences, because the vocabulary and the
//! scaler are fitted on each fold's training part. Embedding features are
//! fixed vectors computed once per document.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::config::{FeatureSpec, FeatureType, Stopwords};
use super::SelectionError;
use crate::corpus::{DocType, RawDocument};
use crate::embeddings::{average_doc_vector, infer_doc_vector, Doc2VecModel, WordEmbedding};
use crate::matrix::FeatureMatrix;
use crate::ngram::{build_vocab_with_capacity, fit_scaler, transform, vectorize, MinMaxScaler, NgramVocabulary};
use crate::parser::{section_text, strip_outcome_text, ParsedJudgment, SectionKind};
use crate::rng;
use crate::text::{prepare, remove_stopwords, StopWords, TokenSequence, TokenSource};

pub type TokenTable = BTreeMap<String, TokenSequence>;

#[derive(Debug, Clone)]
pub enum FeatureSource {
    Tokens(Arc<TokenTable>),
    Dense(FeatureMatrix),
}

/// Feature sources keyed by spec.
#[derive(Debug, Clone, Default)]
pub struct FeatureStore {
    sources: BTreeMap<FeatureSpec, FeatureSource>,
}

/// Train and held-out matrices for one fold (or for the final fit).
#[derive(Debug, Clone)]
pub struct FoldFeatures {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    /// Set for n-gram features.
    pub vocabulary: Option<NgramVocabulary>,
    pub scaler: Option<MinMaxScaler>,
}

impl FeatureStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, spec: FeatureSpec, source: FeatureSource) {
        self.sources.insert(spec, source);
    }

    pub fn get(&self, spec: &FeatureSpec) -> Option<&FeatureSource> {
        self.sources.get(spec)
    }

    pub fn specs(&self) -> impl Iterator<Item = &FeatureSpec> {
        self.sources.keys()
    }

    pub fn fold_features(
        &self,
        spec: &FeatureSpec,
        train_ids: &[String],
        test_ids: &[String],
    ) -> Result<FoldFeatures, SelectionError> {
        let source = self
            .sources
            .get(spec)
            .ok_or_else(|| SelectionError::MissingFeatures(spec.to_string()))?;
        match source {
            FeatureSource::Dense(m) => {
                let pick = |ids: &[String]| {
                    m.select_ids(ids)
                        .map_err(|e| SelectionError::InvalidConfig(format!("{spec}: {e}")))
                };
                Ok(FoldFeatures {
                    train: pick(train_ids)?,
                    test: pick(test_ids)?,
                    vocabulary: None,
                    scaler: None,
                })
            }
            FeatureSource::Tokens(table) => {
                let docs = |ids: &[String]| {
                    ids.iter()
                        .map(|id| {
                            table
                                .get(id)
                                .cloned()
                                .ok_or_else(|| SelectionError::UnknownCase(id.clone()))
                        })
                        .collect::<Result<Vec<_>, _>>()
                };
                let train_docs = docs(train_ids)?;
                let test_docs = docs(test_ids)?;
                let vocab = build_vocab_with_capacity(&train_docs, spec.dimension);
                let raw_train = vectorize(&train_docs, &vocab);
                let scaler = fit_scaler(&raw_train)
                    .map_err(|e| SelectionError::InvalidConfig(format!("{spec}: {e}")))?;
                let scale = |m: &FeatureMatrix| {
                    transform(m, &scaler).map_err(|e| SelectionError::InvalidConfig(format!("{spec}: {e}")))
                };
                let train = scale(&raw_train)?;
                let test = scale(&vectorize(&test_docs, &vocab))?;
                Ok(FoldFeatures {
                    train,
                    test,
                    vocabulary: Some(vocab),
                    scaler: Some(scaler),
                })
            }
        }
    }
}

/// Tokens of one section, optionally without stop-words.
pub fn section_tokens(
    j: &ParsedJudgment,
    section: SectionKind,
    stopwords: Option<&StopWords>,
) -> Result<TokenSequence, SelectionError> {
    let text = section_text(j, section)?;
    let seq = prepare(
        &text,
        TokenSource {
            doc_id: j.doc_id.clone(),
            section,
            stopwords_removed: false,
        },
    );
    Ok(match stopwords {
        Some(sw) => remove_stopwords(&seq, sw),
        None => seq,
    })
}

/// Text the embedding models may learn from: procedure and facts of each
/// judgment, plus whole bodies of non-judgment documents. Sorted by id.
pub fn embedding_corpus(
    judgments: &[ParsedJudgment],
    others: &[RawDocument],
) -> Result<Vec<(String, TokenSequence)>, SelectionError> {
    let mut out = Vec::with_capacity(judgments.len() + others.len());
    for j in judgments {
        let seq = prepare(
            &strip_outcome_text(j)?,
            TokenSource {
                doc_id: j.doc_id.clone(),
                section: SectionKind::ProcedurePlusFacts,
                stopwords_removed: false,
            },
        );
        out.push((j.doc_id.clone(), seq));
    }
    for d in others.iter().filter(|d| d.doc_type != DocType::Judgment) {
        let seq = prepare(
            &d.body,
            TokenSource {
                doc_id: d.doc_id.clone(),
                section: SectionKind::ProcedurePlusFacts,
                stopwords_removed: false,
            },
        );
        if !seq.is_empty() {
            out.push((d.doc_id.clone(), seq));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Models the embedding feature types draw on. Pretrained vectors are keyed
/// by feature type (glove, law2vec) and used only at their own dimension.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingSources {
    pub pretrained: BTreeMap<FeatureType, WordEmbedding>,
    pub echr2vec: BTreeMap<usize, WordEmbedding>,
    pub doc2vec: BTreeMap<usize, Doc2VecModel>,
}

/// Seed for inferring the paragraph vector of one document view.
pub fn inference_seed(seed: u64, doc_id: &str, section: SectionKind, stopwords: Stopwords) -> u64 {
    rng::derive_seed_str(seed, &format!("{doc_id}/{section}/{}", stopwords.as_str()))
}

/// Builds every requested source over `judgments`. Rows of dense matrices
/// follow the order of `judgments`.
pub fn build_feature_store(
    judgments: &[ParsedJudgment],
    specs: &[FeatureSpec],
    stopwords: &StopWords,
    sources: &EmbeddingSources,
    seed: u64,
) -> Result<FeatureStore, SelectionError> {
    let mut tables: BTreeMap<(SectionKind, Stopwords), Arc<TokenTable>> = BTreeMap::new();
    let mut store = FeatureStore::new();
    let ids: Vec<String> = judgments.iter().map(|j| j.doc_id.clone()).collect();
    for spec in specs {
        spec.validate()?;
        let key = (spec.section, spec.stopwords);
        if !tables.contains_key(&key) {
            let sw = spec.stopwords.removed().then_some(stopwords);
            let mut table = TokenTable::new();
            for j in judgments {
                table.insert(j.doc_id.clone(), section_tokens(j, spec.section, sw)?);
            }
            tables.insert(key, Arc::new(table));
        }
        let table = &tables[&key];
        let missing = |what: &str| SelectionError::MissingFeatures(format!("{spec}: {what}"));
        let source = match spec.feature_type {
            FeatureType::Ngram => FeatureSource::Tokens(Arc::clone(table)),
            FeatureType::Doc2vec => {
                let model = sources
                    .doc2vec
                    .get(&spec.dimension)
                    .ok_or_else(|| missing("no paragraph-vector model at this dimension"))?;
                let rows = ids
                    .iter()
                    .map(|id| {
                        let s = inference_seed(seed, id, spec.section, spec.stopwords);
                        infer_doc_vector(model, &table[id], s)
                    })
                    .collect();
                FeatureSource::Dense(dense(spec, &ids, rows)?)
            }
            word => {
                let emb = match word {
                    FeatureType::Echr2vec => sources.echr2vec.get(&spec.dimension),
                    _ => sources.pretrained.get(&word).filter(|e| e.dim() == spec.dimension),
                }
                .ok_or_else(|| missing("no word embedding at this dimension"))?;
                let rows = ids.iter().map(|id| average_doc_vector(&table[id].tokens, emb)).collect();
                FeatureSource::Dense(dense(spec, &ids, rows)?)
            }
        };
        store.insert(*spec, source);
    }
    Ok(store)
}

fn dense(spec: &FeatureSpec, ids: &[String], rows: Vec<Vec<f64>>) -> Result<FeatureMatrix, SelectionError> {
    let cols = (0..spec.dimension).map(|i| format!("{}_{i}", spec.feature_type)).collect();
    FeatureMatrix::from_rows(ids.to_vec(), cols, rows)
        .map_err(|e| SelectionError::InvalidConfig(format!("{spec}: {e}")))
}
