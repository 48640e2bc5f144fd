//! Court-outcome prediction from judgment text.
//!
//! The crate covers the whole pipeline: a document store with a synthetic
//! generator ([`corpus`]), section segmentation of judgments ([`parser`]),
//! text cleaning ([`text`]), n-gram count features with min-max scaling
//! ([`ngram`]), word and paragraph embeddings ([`embeddings`]), balanced
//! train / ratio-matched test splits ([`dataset`]), a fixed zoo of binary
//! classifiers ([`models`]) and cross-validated model selection with
//! weighted reporting ([`selection`]).

pub mod corpus;
pub mod dataset;
pub mod embeddings;
pub mod matrix;
pub mod models;
pub mod ngram;
pub mod parser;
pub mod rng;
pub mod selection;
pub mod text;

pub use corpus::{DocType, DocumentCollection, RawDocument, SyntheticSpec};
pub use dataset::{ArticlePool, DatasetSplit, Label, LabeledCase};
pub use embeddings::{Doc2VecModel, EmbeddingParams, WordEmbedding};
pub use matrix::FeatureMatrix;
pub use models::{AlgorithmId, Hyper, HyperSetting, TrainedModel};
pub use ngram::{MinMaxScaler, NgramVocabulary};
pub use parser::{ParsedJudgment, SectionKind};
pub use selection::{ConfigSpace, ExperimentConfig, FeatureSpec, Metrics, MetricsReport};
pub use text::{StopWords, TokenSequence};
