use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;
use crate::rng;

/// Initial step size of the logistic-regression schedule.
pub const SGD_ETA0: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearParams {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

fn signed(y: &[bool]) -> Vec<f64> {
    y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect()
}

/// Logistic loss with an L2 penalty on the weights (not the intercept),
/// plain SGD with `η_t = η0 / (1 + η0·λ·t)`, samples reshuffled each epoch.
pub fn fit_sgd(x: &FeatureMatrix, y: &[bool], lambda: f64, epochs: usize, seed: u64) -> LinearParams {
    let ys = signed(y);
    let mut w = vec![0.0; x.n_cols()];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    let mut rng = rng::rng(seed);
    let mut t = 0u64;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = SGD_ETA0 / (1.0 + SGD_ETA0 * lambda * t as f64);
            t += 1;
            let row = x.row(i);
            let margin = ys[i] * (b + w.iter().zip(row).map(|(a, v)| a * v).sum::<f64>());
            // d/ds log(1 + e^{-y s}) = -y σ(-y s)
            let g = -ys[i] * crate::embeddings::sigmoid(-margin);
            let shrink = 1.0 - eta * lambda;
            for (wj, xj) in w.iter_mut().zip(row) {
                *wj = *wj * shrink - eta * g * xj;
            }
            b -= eta * g;
        }
    }
    LinearParams { weights: w, bias: b }
}

/// Pegasos: hinge loss, L2 penalty, `η_t = 1/(λt)`. The intercept is an
/// extra always-one feature and is regularised with the rest.
pub fn fit_pegasos(x: &FeatureMatrix, y: &[bool], lambda: f64, epochs: usize, seed: u64) -> LinearParams {
    let ys = signed(y);
    let mut w = vec![0.0; x.n_cols()];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    let mut rng = rng::rng(seed);
    let mut t = 0u64;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = x.row(i);
            let margin = ys[i] * (b + w.iter().zip(row).map(|(a, v)| a * v).sum::<f64>());
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|wj| *wj *= shrink);
            b *= shrink;
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += eta * ys[i] * xj;
                }
                b += eta * ys[i];
            }
        }
    }
    LinearParams { weights: w, bias: b }
}
