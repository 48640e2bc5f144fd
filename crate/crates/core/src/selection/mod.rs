//! Cross-validated model selection, final evaluation and reporting.

mod config;
mod features;
mod kfold;
mod metrics;
mod report;
mod search;

pub use config::{ConfigSpace, ExperimentConfig, FeatureSpec, FeatureType, Stopwords, SELECTABLE_SECTIONS};
pub use features::{
    build_feature_store, embedding_corpus, inference_seed, section_tokens, EmbeddingSources, FeatureSource,
    FeatureStore, FoldFeatures, TokenTable,
};
pub use kfold::kfold;
pub use metrics::{evaluate, weighted_average, weighted_average_defined, Metrics};
pub use report::{load_report, render_report, ArticleReport, MetricsReport, WeightedMetrics, REPORT_CSV, REPORT_JSON, REPORT_TXT};
pub use search::{
    cv_mean_accuracy, fit_final, grid_search, CvFailure, CvResult, FinalFit, GridOutcome, SearchOptions, DEFAULT_FOLDS,
};

use crate::parser::SectionError;

#[derive(Debug, thiserror::Error)]
pub enum SelectionError {
    #[error("cannot split {n} samples into {k} folds")]
    FoldCount { n: usize, k: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no features available for {0}")]
    MissingFeatures(String),
    #[error("no features for case {0}")]
    UnknownCase(String),
    #[error("{config}: {cause}")]
    Fit { config: String, cause: String },
    #[error("article {article}: every configuration failed:\n  {}", causes.join("\n  "))]
    AllFailed { article: String, causes: Vec<String> },
    #[error("configuration space is empty")]
    EmptySpace,
    #[error("values and weights cover different articles")]
    KeyMismatch,
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}
