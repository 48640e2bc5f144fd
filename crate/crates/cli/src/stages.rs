//! Pipeline stages. Each stage reads what earlier stages wrote to the output
//! directory, so running the stages one by one gives the same artifacts as
//! an end-to-end run.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use verdict_core::corpus::{generate_synthetic, load_corpus, save_corpus};
use verdict_core::dataset::{check_split, historical_ratio, label_cases, make_split, ArticlePool, DatasetSplit, SplitManifest};
use verdict_core::embeddings::{
    load_pretrained, train_doc2vec, train_word_embedding, write_embedding, Doc2VecModel, EmbeddingParams,
};
use verdict_core::models::{fit_heuristic, TrainedModel};
use verdict_core::parser::{is_standard, segment, HeadingConfig};
use verdict_core::selection::{
    build_feature_store, embedding_corpus, evaluate, fit_final, grid_search, render_report, ArticleReport,
    EmbeddingSources, ExperimentConfig, FeatureSource, FeatureSpec, FeatureStore, FeatureType, GridOutcome,
    MetricsReport, SearchOptions, DEFAULT_FOLDS,
};
use verdict_core::{DocType, DocumentCollection, FeatureMatrix, ParsedJudgment, RawDocument, StopWords};

use crate::artifacts::{self, *};
use crate::config::PipelineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Synth,
    Parse,
    Split,
    Embed,
    Features,
    Search,
    Eval,
    Report,
}

impl Stage {
    /// Order of an end-to-end run.
    pub const ALL: [Stage; 8] = [
        Stage::Synth,
        Stage::Parse,
        Stage::Split,
        Stage::Embed,
        Stage::Features,
        Stage::Search,
        Stage::Eval,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Parse => "parse",
            Stage::Split => "split",
            Stage::Embed => "embed",
            Stage::Features => "features",
            Stage::Search => "search",
            Stage::Eval => "eval",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error("{} not found; run {needs} first", path.display())]
    Missing { needs: Stage, path: PathBuf },
    #[error("{0}")]
    Failed(String),
}

impl StageError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        StageError::Failed(format!("{}: {e}", path.display()))
    }
}

fn fail<E: fmt::Display>(e: E) -> StageError {
    StageError::Failed(e.to_string())
}

pub struct Context {
    pub cfg: PipelineConfig,
    pub out: PathBuf,
    pub dry_run: bool,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn log(&self, stage: Stage, msg: &str) {
        eprintln!("[{stage}] {msg}");
    }

    fn stopwords(&self) -> Result<StopWords, StageError> {
        match &self.cfg.stopwords {
            Some(p) => StopWords::from_file(p).map_err(fail),
            None => Ok(StopWords::bundled()),
        }
    }

    fn headings(&self) -> Result<HeadingConfig, StageError> {
        match &self.cfg.headings {
            Some(p) => HeadingConfig::from_file(p).map_err(fail),
            None => Ok(HeadingConfig::default()),
        }
    }
}

pub fn run_stage(stage: Stage, ctx: &Context) -> Result<(), StageError> {
    if ctx.dry_run && stage == Stage::Search {
        return search_dry_run(ctx);
    }
    ensure_dir(&ctx.out)?;
    let result = match stage {
        Stage::Synth => synth(ctx),
        Stage::Parse => parse(ctx),
        Stage::Split => split(ctx),
        Stage::Embed => embed(ctx),
        Stage::Features => features(ctx),
        Stage::Search => search(ctx),
        Stage::Eval => eval(ctx),
        Stage::Report => report(ctx),
    };
    let status = match &result {
        Ok(()) => Status {
            stage: stage.to_string(),
            ok: true,
            error: None,
        },
        Err(e) => Status {
            stage: stage.to_string(),
            ok: false,
            error: Some(e.to_string()),
        },
    };
    write_json(&ctx.path(STATUS), &status)?;
    result
}

pub fn run_all(ctx: &Context) -> Result<(), (Stage, StageError)> {
    for stage in Stage::ALL {
        run_stage(stage, ctx).map_err(|e| (stage, e))?;
    }
    Ok(())
}

/// Last stage attempted; a failed entry marks the artifacts as partial.
#[derive(Debug, Serialize, Deserialize)]
struct Status {
    stage: String,
    ok: bool,
    error: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusManifest {
    source: String,
    synthetic_seed: Option<u64>,
    documents: usize,
    judgments: usize,
    sha256: String,
}

fn synth(ctx: &Context) -> Result<(), StageError> {
    let (collection, source, synthetic_seed) = match (&ctx.cfg.synthetic, &ctx.cfg.corpus) {
        (Some(spec), _) => (generate_synthetic(spec).map_err(fail)?, "synthetic".to_string(), Some(spec.seed)),
        (None, Some(path)) => (load_corpus(path).map_err(fail)?, path.display().to_string(), None),
        (None, None) => unreachable!("validated config"),
    };
    let path = ctx.path(CORPUS);
    save_corpus(&collection, &path).map_err(fail)?;
    let manifest = CorpusManifest {
        source,
        synthetic_seed,
        documents: collection.len(),
        judgments: collection
            .documents
            .iter()
            .filter(|d| d.doc_type == DocType::Judgment)
            .count(),
        sha256: file_sha256(&path)?,
    };
    write_json(&ctx.path(CORPUS_MANIFEST), &manifest)?;
    ctx.log(Stage::Synth, &format!("{} documents", manifest.documents));
    Ok(())
}

fn read_corpus(ctx: &Context) -> Result<DocumentCollection, StageError> {
    let path = ctx.path(CORPUS);
    require(&path, Stage::Synth)?;
    load_corpus(&path).map_err(fail)
}

#[derive(Debug, Serialize, Deserialize)]
struct ParseManifest {
    corpus_sha256: String,
    standard: usize,
    rejected: Vec<Rejected>,
    sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Rejected {
    doc_id: String,
    reason: String,
}

fn parse(ctx: &Context) -> Result<(), StageError> {
    let corpus = read_corpus(ctx)?;
    let corpus_manifest: CorpusManifest = read_json(&ctx.path(CORPUS_MANIFEST), Stage::Synth)?;
    let headings = ctx.headings()?;
    let path = ctx.path(PARSED);
    let mut out = Vec::new();
    let mut rejected = Vec::new();
    for doc in corpus.documents.iter().filter(|d| d.doc_type == DocType::Judgment) {
        let parsed = segment(doc, &headings);
        if is_standard(&parsed) {
            let j = parsed.expect("standard implies parsed");
            serde_json::to_writer(&mut out, &j).map_err(fail)?;
            out.push(b'\n');
        } else {
            rejected.push(Rejected {
                doc_id: doc.doc_id.clone(),
                reason: match parsed {
                    Err(e) => e.to_string(),
                    Ok(_) => "empty section".to_string(),
                },
            });
        }
    }
    fs::write(&path, &out).map_err(|e| StageError::io(&path, e))?;
    let standard = out.iter().filter(|&&b| b == b'\n').count();
    ctx.log(Stage::Parse, &format!("{standard} standard judgments, {} rejected", rejected.len()));
    write_json(
        &ctx.path(PARSE_MANIFEST),
        &ParseManifest {
            corpus_sha256: corpus_manifest.sha256,
            standard,
            rejected,
            sha256: sha256_hex(&out),
        },
    )
}

fn read_parsed(ctx: &Context) -> Result<Vec<ParsedJudgment>, StageError> {
    let path = ctx.path(PARSED);
    require(&path, Stage::Parse)?;
    let file = fs::File::open(&path).map_err(|e| StageError::io(&path, e))?;
    BufReader::new(file)
        .lines()
        .map(|line| {
            let line = line.map_err(|e| StageError::io(&path, e))?;
            serde_json::from_str(&line).map_err(fail)
        })
        .collect()
}

/// Standard judgments as raw documents, for labelling.
fn standard_documents(ctx: &Context) -> Result<Vec<RawDocument>, StageError> {
    let corpus = read_corpus(ctx)?;
    let parsed = read_parsed(ctx)?;
    let ids: std::collections::BTreeSet<&str> = parsed.iter().map(|j| j.doc_id.as_str()).collect();
    Ok(corpus
        .documents
        .into_iter()
        .filter(|d| ids.contains(d.doc_id.as_str()))
        .collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitArtifact {
    manifest: SplitManifest,
    pool_violations: usize,
    pool_nonviolations: usize,
    /// "pool" or "config".
    r_target_source: String,
}

fn split(ctx: &Context) -> Result<(), StageError> {
    let docs = standard_documents(ctx)?;
    for article in &ctx.cfg.articles {
        let pool = label_cases(&docs, article).map_err(fail)?;
        let (r_target, source) = match ctx.cfg.split.r_target.get(article) {
            Some(r) => (*r, "config"),
            None => (historical_ratio(&pool).map_err(fail)?, "pool"),
        };
        let seed = ctx.cfg.split_seed(article);
        let split = make_split(&pool, r_target, ctx.cfg.split.holdout_fraction, seed).map_err(fail)?;
        check_split(&split).map_err(StageError::Failed)?;
        ctx.log(
            Stage::Split,
            &format!("article {article}: train {}, test {}", split.train.len(), split.test.len()),
        );
        write_json(
            &article_file(&ctx.path(SPLITS), article),
            &SplitArtifact {
                manifest: split.manifest(),
                pool_violations: pool.v_count,
                pool_nonviolations: pool.nv_count,
                r_target_source: source.into(),
            },
        )?;
    }
    Ok(())
}

fn read_split(ctx: &Context, article: &str) -> Result<(DatasetSplit, ArticlePool, SplitArtifact), StageError> {
    let art: SplitArtifact = read_json(&article_file(&ctx.path(SPLITS), article), Stage::Split)?;
    let docs = standard_documents(ctx)?;
    let pool = label_cases(&docs, article).map_err(fail)?;
    let split = DatasetSplit::from_manifest(&art.manifest, &pool).map_err(fail)?;
    Ok((split, pool, art))
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct EmbeddingManifest {
    entries: Vec<EmbeddingEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingEntry {
    kind: FeatureType,
    dim: usize,
    params: EmbeddingParams,
    key: String,
    file: String,
}

fn embed(ctx: &Context) -> Result<(), StageError> {
    let parse_manifest: ParseManifest = read_json(&ctx.path(PARSE_MANIFEST), Stage::Parse)?;
    let jobs: Vec<(FeatureType, EmbeddingParams)> = ctx
        .cfg
        .word2vec_params()
        .into_values()
        .map(|p| (FeatureType::Echr2vec, p))
        .chain(ctx.cfg.doc2vec_params().into_values().map(|p| (FeatureType::Doc2vec, p)))
        .collect();
    let dir = ctx.path(EMBEDDINGS);
    ensure_dir(&dir)?;
    let mut corpus = None;
    let mut manifest = EmbeddingManifest::default();
    for (kind, params) in jobs {
        let key = content_key(&(kind, &params, &parse_manifest.sha256, &parse_manifest.corpus_sha256));
        let ext = if kind == FeatureType::Echr2vec { "txt" } else { "json" };
        let file = format!("{kind}-{}-{}.{ext}", params.dim, &key[..16]);
        let path = dir.join(&file);
        if path.exists() {
            ctx.log(Stage::Embed, &format!("{file} cached"));
        } else {
            if corpus.is_none() {
                let parsed = read_parsed(ctx)?;
                let others: Vec<RawDocument> = read_corpus(ctx)?
                    .documents
                    .into_iter()
                    .filter(|d| d.doc_type != DocType::Judgment)
                    .collect();
                corpus = Some(embedding_corpus(&parsed, &others).map_err(fail)?);
            }
            let docs = corpus.as_ref().expect("built above");
            ctx.log(Stage::Embed, &format!("training {kind} dim {}", params.dim));
            if kind == FeatureType::Echr2vec {
                let seqs: Vec<_> = docs.iter().map(|(_, s)| s.clone()).collect();
                let emb = train_word_embedding(&seqs, &params).map_err(fail)?;
                let tmp = path.with_extension("tmp");
                write_embedding(&emb, &tmp, true).map_err(fail)?;
                fs::rename(&tmp, &path).map_err(|e| StageError::io(&path, e))?;
            } else {
                let model = train_doc2vec(docs, &params).map_err(fail)?;
                let tmp = path.with_extension("tmp");
                fs::write(&tmp, serde_json::to_string(&model).map_err(fail)?).map_err(|e| StageError::io(&tmp, e))?;
                fs::rename(&tmp, &path).map_err(|e| StageError::io(&path, e))?;
            }
        }
        manifest.entries.push(EmbeddingEntry {
            kind,
            dim: params.dim,
            params,
            key,
            file,
        });
    }
    write_json(&dir.join(MANIFEST), &manifest)
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct FeatureManifest {
    entries: Vec<FeatureEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FeatureEntry {
    spec: FeatureSpec,
    key: String,
    file: String,
    inference_seed: Option<u64>,
}

/// Standard judgments of the configured articles.
fn article_judgments(ctx: &Context) -> Result<Vec<ParsedJudgment>, StageError> {
    let parsed = read_parsed(ctx)?;
    Ok(parsed
        .into_iter()
        .filter(|j| ctx.cfg.articles.iter().any(|a| j.metadata.articles.contains(a)))
        .collect())
}

fn features(ctx: &Context) -> Result<(), StageError> {
    let parse_manifest: ParseManifest = read_json(&ctx.path(PARSE_MANIFEST), Stage::Parse)?;
    let emb_dir = ctx.path(EMBEDDINGS);
    let emb_manifest: EmbeddingManifest = read_json(&emb_dir.join(MANIFEST), Stage::Embed)?;
    let stopwords = ctx.stopwords()?;
    let dir = ctx.path(FEATURES);
    ensure_dir(&dir)?;
    let specs: Vec<FeatureSpec> = ctx
        .cfg
        .space
        .feature_specs()
        .into_iter()
        .filter(|s| s.feature_type != FeatureType::Ngram)
        .collect();
    let mut judgments = None;
    let mut manifest = FeatureManifest::default();
    let mut sources = EmbeddingSources::default();
    for spec in specs {
        let (upstream, seed) = match spec.feature_type {
            FeatureType::Glove | FeatureType::Law2vec => {
                let path = ctx.cfg.pretrained.get(spec.feature_type.as_str()).ok_or_else(|| {
                    StageError::Failed(format!("{spec}: no {} vectors configured", spec.feature_type))
                })?;
                (file_sha256(path)?, None)
            }
            kind => {
                let entry = emb_manifest
                    .entries
                    .iter()
                    .find(|e| e.kind == kind && e.dim == spec.dimension)
                    .ok_or_else(|| StageError::Failed(format!("{spec}: embeddings manifest has no entry; rerun embed")))?;
                let seed = (kind == FeatureType::Doc2vec).then(|| ctx.cfg.inference_seed());
                (entry.key.clone(), seed)
            }
        };
        let key = content_key(&(&spec, &upstream, seed, &parse_manifest.sha256, &ctx.cfg.articles, &ctx.cfg.stopwords));
        let slug = format!(
            "{}-{}-{}-{}",
            spec.feature_type,
            spec.dimension,
            spec.section,
            spec.stopwords.as_str()
        );
        let file = format!("{slug}-{}.csv", &key[..16]);
        let path = dir.join(&file);
        if path.exists() {
            ctx.log(Stage::Features, &format!("{file} cached"));
        } else {
            ctx.log(Stage::Features, &format!("building {spec}"));
            load_source(ctx, &spec, &emb_dir, &emb_manifest, &mut sources)?;
            if judgments.is_none() {
                judgments = Some(article_judgments(ctx)?);
            }
            let store = build_feature_store(
                judgments.as_ref().expect("loaded above"),
                &[spec],
                &stopwords,
                &sources,
                ctx.cfg.inference_seed(),
            )
            .map_err(fail)?;
            let Some(FeatureSource::Dense(m)) = store.get(&spec) else {
                unreachable!("embedding specs build dense matrices")
            };
            let tmp = path.with_extension("tmp");
            m.save(&tmp).map_err(fail)?;
            fs::rename(&tmp, &path).map_err(|e| StageError::io(&path, e))?;
        }
        manifest.entries.push(FeatureEntry {
            spec,
            key,
            file,
            inference_seed: seed,
        });
    }
    write_json(&dir.join(MANIFEST), &manifest)
}

fn load_source(
    ctx: &Context,
    spec: &FeatureSpec,
    emb_dir: &Path,
    manifest: &EmbeddingManifest,
    sources: &mut EmbeddingSources,
) -> Result<(), StageError> {
    match spec.feature_type {
        FeatureType::Ngram => {}
        FeatureType::Glove | FeatureType::Law2vec => {
            if !sources.pretrained.contains_key(&spec.feature_type) {
                let path = &ctx.cfg.pretrained[spec.feature_type.as_str()];
                let emb = load_pretrained(path).map_err(fail)?;
                sources.pretrained.insert(spec.feature_type, emb);
            }
        }
        kind => {
            let entry = manifest
                .entries
                .iter()
                .find(|e| e.kind == kind && e.dim == spec.dimension)
                .expect("checked by caller");
            let path = emb_dir.join(&entry.file);
            require(&path, Stage::Embed)?;
            if kind == FeatureType::Echr2vec {
                if !sources.echr2vec.contains_key(&spec.dimension) {
                    sources
                        .echr2vec
                        .insert(spec.dimension, load_pretrained(&path).map_err(fail)?);
                }
            } else if !sources.doc2vec.contains_key(&spec.dimension) {
                let text = fs::read_to_string(&path).map_err(|e| StageError::io(&path, e))?;
                let model: Doc2VecModel = serde_json::from_str(&text).map_err(fail)?;
                sources.doc2vec.insert(spec.dimension, model);
            }
        }
    }
    Ok(())
}

/// Token sources for n-gram specs plus saved dense matrices.
fn load_store(ctx: &Context, specs: &[FeatureSpec]) -> Result<FeatureStore, StageError> {
    let ngram: Vec<FeatureSpec> = specs
        .iter()
        .copied()
        .filter(|s| s.feature_type == FeatureType::Ngram)
        .collect();
    let judgments = article_judgments(ctx)?;
    let mut store = build_feature_store(
        &judgments,
        &ngram,
        &ctx.stopwords()?,
        &EmbeddingSources::default(),
        ctx.cfg.inference_seed(),
    )
    .map_err(fail)?;
    if ngram.len() < specs.len() {
        let dir = ctx.path(FEATURES);
        let manifest: FeatureManifest = read_json(&dir.join(MANIFEST), Stage::Features)?;
        for spec in specs.iter().filter(|s| s.feature_type != FeatureType::Ngram) {
            let entry = manifest
                .entries
                .iter()
                .find(|e| e.spec == *spec)
                .ok_or_else(|| StageError::Failed(format!("{spec}: not in features manifest; rerun features")))?;
            let path = dir.join(&entry.file);
            require(&path, Stage::Features)?;
            let m = FeatureMatrix::load(&path).map_err(fail)?;
            store.insert(*spec, FeatureSource::Dense(m));
        }
    }
    Ok(store)
}

#[derive(Debug, Serialize, Deserialize)]
struct SearchArtifact {
    article: String,
    folds: usize,
    fold_seed: u64,
    model_seed: u64,
    outcome: GridOutcome,
}

fn search_dry_run(ctx: &Context) -> Result<(), StageError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for article in &ctx.cfg.articles {
        for c in ctx.cfg.space.enumerate(article, ctx.cfg.model_seed(article)) {
            writeln!(out, "{}\t{}\t{}", c.article, c.features, c.hyper.hyper).map_err(fail)?;
        }
    }
    Ok(())
}

fn search(ctx: &Context) -> Result<(), StageError> {
    let store = load_store(ctx, &ctx.cfg.space.feature_specs())?;
    for article in &ctx.cfg.articles {
        let (split, _, _) = read_split(ctx, article)?;
        let space = ctx.cfg.space.enumerate(article, ctx.cfg.model_seed(article));
        let options = SearchOptions {
            folds: DEFAULT_FOLDS,
            fold_seed: ctx.cfg.fold_seed(article),
            workers: ctx.cfg.workers,
        };
        ctx.log(Stage::Search, &format!("article {article}: {} configs", space.len()));
        let outcome = grid_search(article, &space, &split.train, &store, &options).map_err(fail)?;
        ctx.log(
            Stage::Search,
            &format!(
                "article {article}: best {} (cv {:.4}), {} failed",
                outcome.best.config, outcome.best.mean_accuracy,
                outcome.failures.len()
            ),
        );
        write_json(
            &article_file(&ctx.path(SEARCH), article),
            &SearchArtifact {
                article: article.clone(),
                folds: options.folds,
                fold_seed: options.fold_seed,
                model_seed: ctx.cfg.model_seed(article),
                outcome,
            },
        )?;
    }
    Ok(())
}

fn eval(ctx: &Context) -> Result<(), StageError> {
    for article in &ctx.cfg.articles {
        let search: SearchArtifact = read_json(&article_file(&ctx.path(SEARCH), article), Stage::Search)?;
        let best: &ExperimentConfig = &search.outcome.best.config;
        let (split, pool, art) = read_split(ctx, article)?;
        let store = load_store(ctx, &[best.features])?;
        let fit = fit_final(best, &split.train, &split.test, &store).map_err(fail)?;
        let reference = (pool.v_count as u64, pool.nv_count as u64);
        let heuristic_model = fit_heuristic(reference.0, reference.1).map_err(fail)?;
        let heuristic = evaluate(&heuristic_model, &fit.features.test, &fit.test_labels).map_err(fail)?;
        let test_violations = DatasetSplit::count(&split.test, verdict_core::Label::Violation);
        let report = ArticleReport {
            article: article.clone(),
            best: best.clone(),
            cv_mean_accuracy: search.outcome.best.mean_accuracy,
            cv_fold_accuracies: search.outcome.best.fold_accuracies.clone(),
            configs_evaluated: search.outcome.results.len() + search.outcome.failures.len(),
            configs_failed: search.outcome.failures.len(),
            split_seed: art.manifest.seed,
            fold_seed: search.fold_seed,
            r_target: split.r_target,
            train_size: split.train.len(),
            test_size: split.test.len(),
            test_violations,
            test_nonviolations: split.test.len() - test_violations,
            heuristic_reference: reference,
            model: fit.metrics,
            heuristic,
        };
        ctx.log(
            Stage::Eval,
            &format!(
                "article {article}: model {:.4}, heuristic {:.4}",
                report.model.accuracy, report.heuristic.accuracy
            ),
        );
        save_model(&article_file(&ctx.path(MODELS), article), &fit.model)?;
        write_json(&article_file(&ctx.path(EVAL), article), &report)?;
    }
    Ok(())
}

fn save_model(path: &Path, model: &TrainedModel) -> Result<(), StageError> {
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    model.save(path).map_err(fail)
}

fn report(ctx: &Context) -> Result<(), StageError> {
    let mut articles = Vec::new();
    for article in &ctx.cfg.articles {
        articles.push(read_json::<ArticleReport>(&article_file(&ctx.path(EVAL), article), Stage::Eval)?);
    }
    let report = MetricsReport::new(ctx.cfg.seed, articles).map_err(fail)?;
    render_report(&report, &ctx.out).map_err(fail)?;
    ctx.log(
        Stage::Report,
        &format!(
            "weighted accuracy: model {:.4}, heuristic {:.4}",
            report.weighted.model_accuracy, report.weighted.heuristic_accuracy
        ),
    );
    Ok(())
}

/// Reads every per-article artifact of one kind; used by tests and tooling.
pub fn read_article_artifacts<T: for<'de> Deserialize<'de>>(
    out: &Path,
    kind: &str,
    articles: &[String],
) -> Result<BTreeMap<String, T>, StageError> {
    let producer = match kind {
        SPLITS => Stage::Split,
        SEARCH => Stage::Search,
        _ => Stage::Eval,
    };
    articles
        .iter()
        .map(|a| Ok((a.clone(), artifacts::read_json(&article_file(&out.join(kind), a), producer)?)))
        .collect()
}
