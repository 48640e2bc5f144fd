use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{build_levelwise, build_per_node, Columns, Criterion, FeatureBudget, Tree, TreeParams};
use super::MaxFeatures;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: Vec<Tree>,
}

impl ForestParams {
    /// Share of trees voting violation, minus one half.
    pub fn score(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.predict(x) >= 0.5).count();
        votes as f64 / self.trees.len() as f64 - 0.5
    }
}

pub struct ForestSpec {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

/// Tree `t` draws its bootstrap sample and feature subsets from
/// `derive_seed(seed, t)`.
pub(crate) fn fit_forest(cols: &Columns, y: &[bool], spec: &ForestSpec) -> ForestParams {
    let n = cols.n_rows();
    let d = cols.n_cols();
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(u8::from(v))).collect();
    let budget = match spec.max_features {
        MaxFeatures::All => FeatureBudget::All,
        MaxFeatures::Sqrt => FeatureBudget::Sample(((d as f64).sqrt().floor() as usize).max(1)),
    };
    let params = TreeParams {
        max_depth: spec.max_depth,
        min_samples_leaf: spec.min_samples_leaf,
        criterion: Criterion::Gini,
    };
    let trees = (0..spec.n_trees)
        .map(|t| {
            let mut r = rng::rng(rng::derive_seed(spec.seed, t as u64));
            let mut w = vec![0.0; n];
            if spec.bootstrap {
                for _ in 0..n {
                    w[r.random_range(0..n)] += 1.0;
                }
            } else {
                w.iter_mut().for_each(|v| *v = 1.0);
            }
            build_per_node(cols, &yf, &w, &params, budget, &mut r).tree
        })
        .collect();
    ForestParams { trees }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub stumps: Vec<Tree>,
    pub alphas: Vec<f64>,
    /// Used when no stump beat chance on the first round.
    pub fallback: f64,
}

impl AdaBoostParams {
    pub fn score(&self, x: &[f64]) -> f64 {
        if self.stumps.is_empty() {
            return self.fallback;
        }
        self.stumps
            .iter()
            .zip(&self.alphas)
            .map(|(s, a)| if s.predict(x) >= 0.5 { *a } else { -a })
            .sum()
    }
}

/// Two-class SAMME with depth-1 trees. A stump with zero weighted error is
/// kept with weight 1 and ends training; a stump with error of one half or
/// more is discarded and ends training.
pub(crate) fn fit_adaboost(cols: &Columns, y: &[bool], rounds: usize) -> AdaBoostParams {
    let n = cols.n_rows();
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(u8::from(v))).collect();
    let mut w = vec![1.0 / n as f64; n];
    let params = TreeParams {
        max_depth: Some(1),
        min_samples_leaf: 1,
        criterion: Criterion::Gini,
    };
    let pos = y.iter().filter(|&&v| v).count();
    let fallback = if 2 * pos >= n { 1.0 } else { -1.0 };
    let mut stumps = Vec::new();
    let mut alphas = Vec::new();
    for _ in 0..rounds {
        let fitted = build_levelwise(cols, &yf, &w, &params);
        let stump = fitted.tree;
        let total: f64 = w.iter().sum();
        let leaf_says: Vec<bool> = (0..n)
            .map(|i| stump.leaf_value(fitted.leaf_of[i] as usize) >= 0.5)
            .collect();
        let miss: f64 = (0..n).filter(|&i| leaf_says[i] != y[i]).map(|i| w[i]).sum();
        let err = miss / total;
        if err <= 0.0 {
            stumps.push(stump);
            alphas.push(1.0);
            break;
        }
        if err >= 0.5 {
            break;
        }
        let alpha = ((1.0 - err) / err).ln();
        let boost = alpha.exp();
        for i in 0..n {
            if leaf_says[i] != y[i] {
                w[i] *= boost;
            }
        }
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= z);
        stumps.push(stump);
        alphas.push(alpha);
    }
    AdaBoostParams {
        stumps,
        alphas,
        fallback,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostingParams {
    pub init: f64,
    pub learning_rate: f64,
    /// Leaf values hold the Newton step for that leaf.
    pub trees: Vec<Tree>,
}

impl BoostingParams {
    /// Log-odds of violation.
    pub fn score(&self, x: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

/// Logistic-loss gradient boosting: each tree is fit to the residuals
/// `y − p` by squared error and its leaves are set to the Newton step
/// `Σr / Σp(1−p)`.
pub(crate) fn fit_gradient_boosting(
    cols: &Columns,
    y: &[bool],
    n_trees: usize,
    max_depth: usize,
    learning_rate: f64,
) -> BoostingParams {
    let n = cols.n_rows();
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(u8::from(v))).collect();
    let p0 = yf.iter().sum::<f64>() / n as f64;
    let init = (p0 / (1.0 - p0)).ln();
    let mut f = vec![init; n];
    let ones = vec![1.0; n];
    let params = TreeParams {
        max_depth: Some(max_depth),
        min_samples_leaf: 1,
        criterion: Criterion::Mse,
    };
    let mut trees = Vec::with_capacity(n_trees);
    let mut residual = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for _ in 0..n_trees {
        for i in 0..n {
            let p = crate::embeddings::sigmoid(f[i]);
            residual[i] = yf[i] - p;
            hess[i] = p * (1.0 - p);
        }
        let fitted = build_levelwise(cols, &residual, &ones, &params);
        let mut tree = fitted.tree;
        let leaves = tree.nodes.len();
        let mut num = vec![0.0; leaves];
        let mut den = vec![0.0; leaves];
        for i in 0..n {
            let l = fitted.leaf_of[i] as usize;
            num[l] += residual[i];
            den[l] += hess[i];
        }
        for l in 0..leaves {
            if matches!(tree.nodes[l], super::tree::Node::Leaf { .. }) {
                let step = if den[l] < 1e-12 { 0.0 } else { num[l] / den[l] };
                tree.set_leaf_value(l, step);
            }
        }
        for i in 0..n {
            f[i] += learning_rate * tree.leaf_value(fitted.leaf_of[i] as usize);
        }
        trees.push(tree);
    }
    BoostingParams {
        init,
        learning_rate,
        trees,
    }
}
