use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SelectionError;
use crate::dataset::Label;
use crate::matrix::FeatureMatrix;
use crate::models::{predict, ModelError, TrainedModel};

/// Confusion counts and derived rates, violation being positive. Precision
/// and recall are `None` when their denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl Metrics {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        let ratio = |a: u64, b: u64| (b > 0).then(|| a as f64 / b as f64);
        let total = tp + fp + tn + fn_;
        Self {
            tp,
            fp,
            tn,
            fn_,
            accuracy: ratio(tp + tn, total).unwrap_or(0.0),
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
        }
    }

    pub fn from_predictions(predicted: &[Label], truth: &[Label]) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (p, t) in predicted.iter().zip(truth) {
            match (p.is_violation(), t.is_violation()) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        Self::from_counts(tp, fp, tn, fn_)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn evaluate(model: &TrainedModel, x: &FeatureMatrix, y: &[Label]) -> Result<Metrics, ModelError> {
    if x.n_rows() != y.len() {
        return Err(ModelError::LabelCount {
            rows: x.n_rows(),
            labels: y.len(),
        });
    }
    Ok(Metrics::from_predictions(&predict(model, x)?, y))
}

/// `Σ v·w / Σ w` over matching keys.
pub fn weighted_average(
    values: &BTreeMap<String, f64>,
    weights: &BTreeMap<String, f64>,
) -> Result<f64, SelectionError> {
    if !values.keys().eq(weights.keys()) {
        return Err(SelectionError::KeyMismatch);
    }
    if values.is_empty() {
        return Err(SelectionError::InvalidConfig("nothing to average".into()));
    }
    if weights.values().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(SelectionError::InvalidConfig("weights must be positive".into()));
    }
    let num: f64 = values.iter().map(|(k, v)| v * weights[k]).sum();
    let den: f64 = weights.values().sum();
    Ok(num / den)
}

/// As [`weighted_average`], but undefined values are dropped together with
/// their weight. `None` when no value is defined.
pub fn weighted_average_defined(
    values: &BTreeMap<String, Option<f64>>,
    weights: &BTreeMap<String, f64>,
) -> Result<Option<f64>, SelectionError> {
    if !values.keys().eq(weights.keys()) {
        return Err(SelectionError::KeyMismatch);
    }
    let defined: BTreeMap<String, f64> = values
        .iter()
        .filter_map(|(k, v)| v.map(|v| (k.clone(), v)))
        .collect();
    if defined.is_empty() {
        return Ok(None);
    }
    let w: BTreeMap<String, f64> = defined.keys().map(|k| (k.clone(), weights[k])).collect();
    weighted_average(&defined, &w).map(Some)
}
