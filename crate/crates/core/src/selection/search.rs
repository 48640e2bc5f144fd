use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, FeatureSpec};
use super::features::{FeatureStore, FoldFeatures};
use super::kfold::kfold;
use super::metrics::{evaluate, Metrics};
use super::SelectionError;
use crate::dataset::{Label, LabeledCase};
use crate::models::{fit_on, predict, TrainedModel, TrainingSet};

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub config: ExperimentConfig,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvFailure {
    pub config: ExperimentConfig,
    pub cause: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub folds: usize,
    pub fold_seed: u64,
    /// Feature specs evaluated concurrently; results do not depend on it.
    pub workers: usize,
}

impl SearchOptions {
    pub fn new(fold_seed: u64) -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            fold_seed,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub best: CvResult,
    /// Successful configs in canonical order.
    pub results: Vec<CvResult>,
    pub failures: Vec<CvFailure>,
}

fn fold_ids(cases: &[LabeledCase], folds: &[Vec<usize>], held_out: usize) -> (Vec<String>, Vec<String>) {
    let mut train = Vec::new();
    for (f, idx) in folds.iter().enumerate() {
        if f != held_out {
            train.extend(idx.iter().copied());
        }
    }
    train.sort_unstable();
    let ids = |idx: &[usize]| idx.iter().map(|&i| cases[i].doc_id.clone()).collect::<Vec<_>>();
    (ids(&train), ids(&folds[held_out]))
}

fn labels_of<'a>(cases: &'a [LabeledCase], ids: &'a [String]) -> impl Iterator<Item = Label> + 'a {
    let by_id: std::collections::HashMap<&str, Label> = cases.iter().map(|c| (c.doc_id.as_str(), c.label)).collect();
    ids.iter().map(move |id| by_id[id.as_str()])
}

/// Cross-validates every config of one feature spec, building each fold's
/// features once and sharing them across the configs.
fn evaluate_spec(
    spec: &FeatureSpec,
    configs: &[&ExperimentConfig],
    cases: &[LabeledCase],
    folds: &[Vec<usize>],
    store: &FeatureStore,
) -> Vec<Result<CvResult, String>> {
    let mut acc: Vec<Result<Vec<f64>, String>> = vec![Ok(Vec::with_capacity(folds.len())); configs.len()];
    for held_out in 0..folds.len() {
        let (train_ids, test_ids) = fold_ids(cases, folds, held_out);
        let features = match store.fold_features(spec, &train_ids, &test_ids) {
            Ok(f) => f,
            Err(e) => {
                let cause = format!("fold {held_out}: {e}");
                return configs.iter().map(|_| Err(cause.clone())).collect();
            }
        };
        let train_y: Vec<Label> = labels_of(cases, &train_ids).collect();
        let test_y: Vec<Label> = labels_of(cases, &test_ids).collect();
        let data = match TrainingSet::new(&features.train, &train_y) {
            Ok(d) => d,
            Err(e) => {
                let cause = format!("fold {held_out}: {e}");
                return configs.iter().map(|_| Err(cause.clone())).collect();
            }
        };
        for (slot, config) in acc.iter_mut().zip(configs) {
            let Ok(scores) = slot else { continue };
            let outcome = fit_on(&config.hyper, &data).and_then(|m| {
                let pred = predict(&m, &features.test)?;
                Ok(Metrics::from_predictions(&pred, &test_y).accuracy)
            });
            match outcome {
                Ok(a) => scores.push(a),
                Err(e) => *slot = Err(format!("fold {held_out}: {e}")),
            }
        }
    }
    acc.into_iter()
        .zip(configs)
        .map(|(r, c)| {
            r.map(|fold_accuracies| CvResult {
                config: (*c).clone(),
                mean_accuracy: fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64,
                fold_accuracies,
            })
        })
        .collect()
}

/// Mean held-out accuracy of one config over stratified folds.
pub fn cv_mean_accuracy(
    config: &ExperimentConfig,
    cases: &[LabeledCase],
    store: &FeatureStore,
    folds: usize,
    fold_seed: u64,
) -> Result<CvResult, SelectionError> {
    let labels: Vec<Label> = cases.iter().map(|c| c.label).collect();
    let folds = kfold(cases.len(), folds, fold_seed, &labels)?;
    evaluate_spec(&config.features, &[config], cases, &folds, store)
        .pop()
        .expect("one config in, one result out")
        .map_err(|cause| SelectionError::Fit {
            config: config.to_string(),
            cause,
        })
}

/// Exhaustive search over `space`. The best config has the highest mean
/// accuracy; ties go to the canonically earlier config, so the order of
/// `space` does not matter.
pub fn grid_search(
    article: &str,
    space: &[ExperimentConfig],
    cases: &[LabeledCase],
    store: &FeatureStore,
    options: &SearchOptions,
) -> Result<GridOutcome, SelectionError> {
    if space.is_empty() {
        return Err(SelectionError::EmptySpace);
    }
    let mut ordered: Vec<&ExperimentConfig> = space.iter().collect();
    ordered.sort_by(|a, b| a.canonical_cmp(b));
    ordered.dedup_by(|a, b| a.canonical_cmp(b).is_eq());

    let labels: Vec<Label> = cases.iter().map(|c| c.label).collect();
    let folds = kfold(cases.len(), options.folds, options.fold_seed, &labels)?;

    let mut groups: Vec<(FeatureSpec, Vec<&ExperimentConfig>)> = Vec::new();
    for c in ordered {
        match groups.last_mut() {
            Some((spec, members)) if *spec == c.features => members.push(c),
            _ => groups.push((c.features, vec![c])),
        }
    }

    let run = |g: &(FeatureSpec, Vec<&ExperimentConfig>)| evaluate_spec(&g.0, &g.1, cases, &folds, store);
    let outputs: Vec<Vec<Result<CvResult, String>>> = if options.workers <= 1 || groups.len() <= 1 {
        groups.iter().map(run).collect()
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Vec<Result<CvResult, String>>>>> = Mutex::new(vec![None; groups.len()]);
        std::thread::scope(|s| {
            for _ in 0..options.workers.min(groups.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= groups.len() {
                        break;
                    }
                    let out = run(&groups[i]);
                    slots.lock().expect("no worker panicked")[i] = Some(out);
                });
            }
        });
        slots
            .into_inner()
            .expect("no worker panicked")
            .into_iter()
            .map(|o| o.expect("every group evaluated"))
            .collect()
    };

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (out, (_, members)) in outputs.into_iter().zip(&groups) {
        for (r, c) in out.into_iter().zip(members) {
            match r {
                Ok(r) => results.push(r),
                Err(cause) => failures.push(CvFailure {
                    config: (*c).clone(),
                    cause,
                }),
            }
        }
    }
    let mut best: Option<&CvResult> = None;
    for r in &results {
        if best.is_none_or(|b| r.mean_accuracy > b.mean_accuracy) {
            best = Some(r);
        }
    }
    let Some(best) = best.cloned() else {
        return Err(SelectionError::AllFailed {
            article: article.to_string(),
            causes: failures.iter().map(|f| format!("{}: {}", f.config, f.cause)).collect(),
        });
    };
    Ok(GridOutcome {
        best,
        results,
        failures,
    })
}

/// Model refitted on the whole training set, with its test metrics.
#[derive(Debug, Clone)]
pub struct FinalFit {
    pub model: TrainedModel,
    pub features: FoldFeatures,
    pub test_labels: Vec<Label>,
    pub metrics: Metrics,
}

pub fn fit_final(
    config: &ExperimentConfig,
    train: &[LabeledCase],
    test: &[LabeledCase],
    store: &FeatureStore,
) -> Result<FinalFit, SelectionError> {
    let ids = |cases: &[LabeledCase]| cases.iter().map(|c| c.doc_id.clone()).collect::<Vec<_>>();
    let features = store.fold_features(&config.features, &ids(train), &ids(test))?;
    let train_y: Vec<Label> = train.iter().map(|c| c.label).collect();
    let test_labels: Vec<Label> = test.iter().map(|c| c.label).collect();
    let wrap = |e| SelectionError::Fit {
        config: config.to_string(),
        cause: format!("final fit: {e}"),
    };
    let data = TrainingSet::new(&features.train, &train_y).map_err(wrap)?;
    let model = fit_on(&config.hyper, &data).map_err(wrap)?;
    let metrics = evaluate(&model, &features.test, &test_labels).map_err(wrap)?;
    Ok(FinalFit {
        model,
        features,
        test_labels,
        metrics,
    })
}
