//! Classifiers behind one fit/predict contract, plus the majority-class
//! heuristic. Violation is the positive class everywhere: a score of zero or
//! more predicts violation.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::matrix::FeatureMatrix;

mod ensemble;
mod linear;
mod qda;
mod tree;

pub use ensemble::{AdaBoostParams, BoostingParams, ForestParams};
pub use linear::{LinearParams, SGD_ETA0};
pub use qda::{GaussianClass, Precision, QdaError, QdaParams};
pub use tree::{Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    HeuristicMajority,
    SgdLinear,
    LinearSvm,
    DecisionTree,
    RandomForest,
    Adaboost,
    GradientBoosting,
    Qda,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 8] = [
        AlgorithmId::HeuristicMajority,
        AlgorithmId::SgdLinear,
        AlgorithmId::LinearSvm,
        AlgorithmId::DecisionTree,
        AlgorithmId::RandomForest,
        AlgorithmId::Adaboost,
        AlgorithmId::GradientBoosting,
        AlgorithmId::Qda,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::HeuristicMajority => "heuristic_majority",
            AlgorithmId::SgdLinear => "sgd_linear",
            AlgorithmId::LinearSvm => "linear_svm",
            AlgorithmId::DecisionTree => "decision_tree",
            AlgorithmId::RandomForest => "random_forest",
            AlgorithmId::Adaboost => "adaboost",
            AlgorithmId::GradientBoosting => "gradient_boosting",
            AlgorithmId::Qda => "qda",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
}

/// Algorithm plus its hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Hyper {
    HeuristicMajority,
    SgdLinear {
        lambda: f64,
        epochs: usize,
    },
    LinearSvm {
        lambda: f64,
        epochs: usize,
    },
    DecisionTree {
        max_depth: Option<usize>,
        min_samples_leaf: usize,
    },
    RandomForest {
        n_trees: usize,
        max_depth: Option<usize>,
        min_samples_leaf: usize,
        max_features: MaxFeatures,
        bootstrap: bool,
    },
    Adaboost {
        rounds: usize,
    },
    GradientBoosting {
        n_trees: usize,
        max_depth: usize,
        learning_rate: f64,
    },
    Qda {
        gamma: f64,
        epsilon: f64,
    },
}

/// Passes over the data for the linear SVM; the grid fixes it.
pub const SVM_EPOCHS: usize = 20;

impl Hyper {
    pub fn algorithm(&self) -> AlgorithmId {
        match self {
            Hyper::HeuristicMajority => AlgorithmId::HeuristicMajority,
            Hyper::SgdLinear { .. } => AlgorithmId::SgdLinear,
            Hyper::LinearSvm { .. } => AlgorithmId::LinearSvm,
            Hyper::DecisionTree { .. } => AlgorithmId::DecisionTree,
            Hyper::RandomForest { .. } => AlgorithmId::RandomForest,
            Hyper::Adaboost { .. } => AlgorithmId::Adaboost,
            Hyper::GradientBoosting { .. } => AlgorithmId::GradientBoosting,
            Hyper::Qda { .. } => AlgorithmId::Qda,
        }
    }

    /// Named values in declaration order; an unlimited depth reads as
    /// infinity and booleans as 0/1.
    pub fn values(&self) -> Vec<(&'static str, f64)> {
        let depth = |d: &Option<usize>| d.map_or(f64::INFINITY, |v| v as f64);
        match self {
            Hyper::HeuristicMajority => vec![],
            Hyper::SgdLinear { lambda, epochs } | Hyper::LinearSvm { lambda, epochs } => {
                vec![("lambda", *lambda), ("epochs", *epochs as f64)]
            }
            Hyper::DecisionTree {
                max_depth,
                min_samples_leaf,
            } => vec![
                ("max_depth", depth(max_depth)),
                ("min_samples_leaf", *min_samples_leaf as f64),
            ],
            Hyper::RandomForest {
                n_trees,
                max_depth,
                min_samples_leaf,
                max_features,
                bootstrap,
            } => vec![
                ("n_trees", *n_trees as f64),
                ("max_depth", depth(max_depth)),
                ("min_samples_leaf", *min_samples_leaf as f64),
                ("max_features_all", f64::from(u8::from(*max_features == MaxFeatures::All))),
                ("bootstrap", f64::from(u8::from(*bootstrap))),
            ],
            Hyper::Adaboost { rounds } => vec![("rounds", *rounds as f64)],
            Hyper::GradientBoosting {
                n_trees,
                max_depth,
                learning_rate,
            } => vec![
                ("n_trees", *n_trees as f64),
                ("max_depth", *max_depth as f64),
                ("learning_rate", *learning_rate),
            ],
            Hyper::Qda { gamma, epsilon } => vec![("gamma", *gamma), ("epsilon", *epsilon)],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidHyper(msg));
        match self {
            Hyper::SgdLinear { lambda, epochs } | Hyper::LinearSvm { lambda, epochs } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return bad(format!("lambda must be positive, got {lambda}"));
                }
                if *epochs == 0 {
                    return bad("epochs must be at least 1".into());
                }
            }
            Hyper::DecisionTree {
                max_depth,
                min_samples_leaf,
            }
            | Hyper::RandomForest {
                max_depth,
                min_samples_leaf,
                ..
            } => {
                if *max_depth == Some(0) {
                    return bad("max_depth must be at least 1".into());
                }
                if *min_samples_leaf == 0 {
                    return bad("min_samples_leaf must be at least 1".into());
                }
                if let Hyper::RandomForest { n_trees: 0, .. } = self {
                    return bad("n_trees must be at least 1".into());
                }
            }
            Hyper::Adaboost { rounds } => {
                if *rounds == 0 {
                    return bad("rounds must be at least 1".into());
                }
            }
            Hyper::GradientBoosting {
                n_trees,
                max_depth,
                learning_rate,
            } => {
                if *n_trees == 0 || *max_depth == 0 {
                    return bad("n_trees and max_depth must be at least 1".into());
                }
                if !(*learning_rate > 0.0 && learning_rate.is_finite()) {
                    return bad(format!("learning_rate must be positive, got {learning_rate}"));
                }
            }
            Hyper::Qda { gamma, epsilon } => {
                if !(0.0..=1.0).contains(gamma) {
                    return bad(format!("gamma must lie in [0, 1], got {gamma}"));
                }
                if !(*epsilon >= 0.0 && epsilon.is_finite()) {
                    return bad(format!("epsilon must be non-negative, got {epsilon}"));
                }
            }
            Hyper::HeuristicMajority => {}
        }
        Ok(())
    }
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.algorithm())?;
        let vals = self.values();
        if !vals.is_empty() {
            let parts: Vec<String> = vals
                .iter()
                .map(|(k, v)| match *k {
                    "max_features_all" => {
                        format!("max_features={}", if *v == 1.0 { "all" } else { "sqrt" })
                    }
                    "bootstrap" => format!("bootstrap={}", *v == 1.0),
                    _ if v.is_infinite() => format!("{k}=none"),
                    _ => format!("{k}={v}"),
                })
                .collect();
            write!(f, "({})", parts.join(", "))?;
        }
        Ok(())
    }
}

/// The fixed search grid: 13 settings over the seven learning algorithms.
/// The heuristic is not searched; it is fitted from reference counts.
pub fn default_grid() -> Vec<Hyper> {
    let mut grid = Vec::new();
    for lambda in [1e-4, 1e-3] {
        grid.push(Hyper::SgdLinear { lambda, epochs: 20 });
    }
    for lambda in [1e-4, 1e-3] {
        grid.push(Hyper::LinearSvm {
            lambda,
            epochs: SVM_EPOCHS,
        });
    }
    for max_depth in [Some(3), Some(6), None] {
        grid.push(Hyper::DecisionTree {
            max_depth,
            min_samples_leaf: 2,
        });
    }
    grid.push(Hyper::RandomForest {
        n_trees: 100,
        max_depth: None,
        min_samples_leaf: 1,
        max_features: MaxFeatures::Sqrt,
        bootstrap: true,
    });
    for rounds in [50, 100] {
        grid.push(Hyper::Adaboost { rounds });
    }
    grid.push(Hyper::GradientBoosting {
        n_trees: 100,
        max_depth: 3,
        learning_rate: 0.1,
    });
    for gamma in [0.1, 0.5] {
        grid.push(Hyper::Qda {
            gamma,
            epsilon: 1e-6,
        });
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperSetting {
    pub hyper: Hyper,
    pub seed: u64,
}

impl HyperSetting {
    pub fn new(hyper: Hyper, seed: u64) -> Self {
        Self { hyper, seed }
    }

    pub fn algorithm(&self) -> AlgorithmId {
        self.hyper.algorithm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Heuristic {
        violations: u64,
        non_violations: u64,
        prediction: Label,
    },
    Linear(LinearParams),
    Tree(Tree),
    Forest(ForestParams),
    Adaboost(AdaBoostParams),
    GradientBoosting(BoostingParams),
    Qda(QdaParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub algorithm: AlgorithmId,
    pub hyper: HyperSetting,
    /// Feature columns the model was fitted on; empty for the heuristic,
    /// which ignores features.
    pub columns: Vec<String>,
    pub positive_label: Label,
    pub params: ModelParams,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid hyper-parameters: {0}")]
    InvalidHyper(String),
    #[error("{rows} feature rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("training matrix has no rows")]
    NoRows,
    #[error("training matrix has no columns")]
    NoColumns,
    #[error("{algorithm} needs both labels in the training data")]
    SingleClass { algorithm: AlgorithmId },
    #[error("the heuristic is fitted from reference counts, not from features")]
    HeuristicNeedsCounts,
    #[error("heuristic reference counts must not both be zero")]
    EmptyReference,
    #[error("model expects {expected} columns, matrix has {found}")]
    ColumnCount { expected: usize, found: usize },
    #[error("column {index} is {found:?}, model expects {expected:?}")]
    ColumnName {
        index: usize,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Qda(#[from] QdaError),
    #[error("model file {path}: {message}")]
    File { path: String, message: String },
}

/// A training matrix with its labels and lazily built column indexes, so
/// several models can be fitted on the same data without repeating the
/// presorting.
pub struct TrainingSet<'a> {
    x: &'a FeatureMatrix,
    y: Vec<bool>,
    columns: OnceLock<tree::Columns>,
}

impl<'a> TrainingSet<'a> {
    pub fn new(x: &'a FeatureMatrix, labels: &[Label]) -> Result<Self, ModelError> {
        if x.n_rows() != labels.len() {
            return Err(ModelError::LabelCount {
                rows: x.n_rows(),
                labels: labels.len(),
            });
        }
        Ok(Self {
            x,
            y: labels.iter().map(|l| l.is_violation()).collect(),
            columns: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &FeatureMatrix {
        self.x
    }

    fn columns(&self) -> &tree::Columns {
        self.columns.get_or_init(|| tree::Columns::new(self.x))
    }
}

pub fn fit(setting: &HyperSetting, x: &FeatureMatrix, y: &[Label]) -> Result<TrainedModel, ModelError> {
    fit_on(setting, &TrainingSet::new(x, y)?)
}

pub fn fit_on(setting: &HyperSetting, data: &TrainingSet<'_>) -> Result<TrainedModel, ModelError> {
    let hyper = &setting.hyper;
    hyper.validate()?;
    if let Hyper::HeuristicMajority = hyper {
        return Err(ModelError::HeuristicNeedsCounts);
    }
    let x = data.x;
    let y = &data.y;
    if x.n_rows() == 0 {
        return Err(ModelError::NoRows);
    }
    if x.n_cols() == 0 {
        return Err(ModelError::NoColumns);
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(ModelError::SingleClass {
            algorithm: hyper.algorithm(),
        });
    }
    let params = match *hyper {
        Hyper::HeuristicMajority => unreachable!("handled above"),
        Hyper::SgdLinear { lambda, epochs } => {
            ModelParams::Linear(linear::fit_sgd(x, y, lambda, epochs, setting.seed))
        }
        Hyper::LinearSvm { lambda, epochs } => {
            ModelParams::Linear(linear::fit_pegasos(x, y, lambda, epochs, setting.seed))
        }
        Hyper::DecisionTree {
            max_depth,
            min_samples_leaf,
        } => {
            let yf: Vec<f64> = y.iter().map(|&v| f64::from(u8::from(v))).collect();
            let w = vec![1.0; y.len()];
            let params = tree::TreeParams {
                max_depth,
                min_samples_leaf,
                criterion: tree::Criterion::Gini,
            };
            ModelParams::Tree(tree::build_levelwise(data.columns(), &yf, &w, &params).tree)
        }
        Hyper::RandomForest {
            n_trees,
            max_depth,
            min_samples_leaf,
            max_features,
            bootstrap,
        } => ModelParams::Forest(ensemble::fit_forest(
            data.columns(),
            y,
            &ensemble::ForestSpec {
                n_trees,
                max_depth,
                min_samples_leaf,
                max_features,
                bootstrap,
                seed: setting.seed,
            },
        )),
        Hyper::Adaboost { rounds } => {
            ModelParams::Adaboost(ensemble::fit_adaboost(data.columns(), y, rounds))
        }
        Hyper::GradientBoosting {
            n_trees,
            max_depth,
            learning_rate,
        } => ModelParams::GradientBoosting(ensemble::fit_gradient_boosting(
            data.columns(),
            y,
            n_trees,
            max_depth,
            learning_rate,
        )),
        Hyper::Qda { gamma, epsilon } => ModelParams::Qda(qda::fit_qda(x, y, gamma, epsilon)?),
    };
    Ok(TrainedModel {
        algorithm: hyper.algorithm(),
        hyper: setting.clone(),
        columns: x.column_names().to_vec(),
        positive_label: Label::Violation,
        params,
    })
}

/// Constant predictor of the more common label in the reference counts;
/// a tie predicts violation.
pub fn fit_heuristic(violations: u64, non_violations: u64) -> Result<TrainedModel, ModelError> {
    if violations + non_violations == 0 {
        return Err(ModelError::EmptyReference);
    }
    let prediction = Label::from_violation(violations >= non_violations);
    Ok(TrainedModel {
        algorithm: AlgorithmId::HeuristicMajority,
        hyper: HyperSetting::new(Hyper::HeuristicMajority, 0),
        columns: Vec::new(),
        positive_label: Label::Violation,
        params: ModelParams::Heuristic {
            violations,
            non_violations,
            prediction,
        },
    })
}

impl TrainedModel {
    fn check_columns(&self, x: &FeatureMatrix) -> Result<(), ModelError> {
        if matches!(self.params, ModelParams::Heuristic { .. }) {
            return Ok(());
        }
        if x.n_cols() != self.columns.len() {
            return Err(ModelError::ColumnCount {
                expected: self.columns.len(),
                found: x.n_cols(),
            });
        }
        if let Some((index, (want, got))) = self
            .columns
            .iter()
            .zip(x.column_names())
            .enumerate()
            .find(|(_, (a, b))| a != b)
        {
            return Err(ModelError::ColumnName {
                index,
                expected: want.clone(),
                found: got.clone(),
            });
        }
        Ok(())
    }

    /// Real-valued score per row; zero or above means violation.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Heuristic { prediction, .. } => {
                if prediction.is_violation() {
                    1.0
                } else {
                    -1.0
                }
            }
            ModelParams::Linear(p) => p.score(row),
            ModelParams::Tree(t) => t.predict(row) - 0.5,
            ModelParams::Forest(f) => f.score(row),
            ModelParams::Adaboost(a) => a.score(row),
            ModelParams::GradientBoosting(g) => g.score(row),
            ModelParams::Qda(q) => q.score(row),
        }
    }

    pub fn scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        self.check_columns(x)?;
        Ok(x.rows().map(|r| self.score_row(r)).collect())
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let err = |message: String| ModelError::File {
            path: path.display().to_string(),
            message,
        };
        let json = serde_json::to_string(self).map_err(|e| err(e.to_string()))?;
        fs::write(path, json).map_err(|e| err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let err = |message: String| ModelError::File {
            path: path.display().to_string(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| err(e.to_string()))
    }
}

pub fn predict(model: &TrainedModel, x: &FeatureMatrix) -> Result<Vec<Label>, ModelError> {
    Ok(model
        .scores(x)?
        .into_iter()
        .map(|s| Label::from_violation(s >= 0.0))
        .collect())
}
