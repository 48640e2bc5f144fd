//! Quadratic discriminant analysis with diagonal shrinkage.
//!
//! Each class covariance is `Σ = (1−γ)S + γ·diag(S) + εI`, written as
//! `D + UUᵀ` with `D = γ·diag(S) + εI` and `U = sqrt((1−γ)/(n−1))·Xcᵀ`.
//! When there are more features than class samples the inverse and the log
//! determinant go through the `n × n` capacitance matrix `I + UᵀD⁻¹U`
//! instead of the `d × d` covariance.

use nalgebra::{DMatrix, DMatrixView, DVector};
use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdaParams {
    /// Negative class first, then positive.
    pub classes: [GaussianClass; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianClass {
    pub log_prior: f64,
    pub mean: Vec<f64>,
    pub log_det: f64,
    pub form: Precision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Lower Cholesky factor of the full covariance, column-major.
    Dense { chol: Vec<f64> },
    /// `inv_sqrt_d = D^{-1/2}`, `w = D^{-1/2}U` (d × k) and the lower
    /// Cholesky factor of `I + WᵀW` (k × k), both column-major.
    LowRank {
        inv_sqrt_d: Vec<f64>,
        w: Vec<f64>,
        k: usize,
        chol: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QdaError {
    #[error("class {class} needs at least 2 samples, has {count}")]
    TooFewSamples { class: usize, count: usize },
    #[error("covariance of class {class} is singular after regularisation")]
    Singular { class: usize },
}

fn lower_solve(l: DMatrixView<'_, f64>, b: &DVector<f64>) -> DVector<f64> {
    l.solve_lower_triangular(b)
        .expect("Cholesky factor has a positive diagonal")
}

fn column_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.as_slice().to_vec()
}

fn fit_class(rows: &[&[f64]], n_total: usize, gamma: f64, epsilon: f64, class: usize) -> Result<GaussianClass, QdaError> {
    let n = rows.len();
    if n < 2 {
        return Err(QdaError::TooFewSamples { class, count: n });
    }
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(*r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    // centred samples as a d × n matrix
    let xc = DMatrix::from_fn(d, n, |j, i| rows[i][j] - mean[j]);
    let mut diag_s = vec![0.0; d];
    for j in 0..d {
        diag_s[j] = xc.row(j).iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64;
    }
    let dvec: Vec<f64> = diag_s.iter().map(|s| gamma * s + epsilon).collect();
    if dvec.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(QdaError::Singular { class });
    }
    let u_scale = ((1.0 - gamma) / (n - 1) as f64).sqrt();
    let log_prior = (n as f64 / n_total as f64).ln();

    let (form, log_det) = if d <= n {
        let mut sigma = &xc * xc.transpose() * (u_scale * u_scale);
        for j in 0..d {
            sigma[(j, j)] += dvec[j];
        }
        let chol = nalgebra::Cholesky::new(sigma).ok_or(QdaError::Singular { class })?;
        let l = chol.l();
        let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        (Precision::Dense { chol: column_major(&l) }, log_det)
    } else {
        let inv_sqrt_d: Vec<f64> = dvec.iter().map(|v| 1.0 / v.sqrt()).collect();
        let mut w = xc * u_scale;
        for j in 0..d {
            w.row_mut(j).scale_mut(inv_sqrt_d[j]);
        }
        let mut cap = w.transpose() * &w;
        for i in 0..n {
            cap[(i, i)] += 1.0;
        }
        let chol = nalgebra::Cholesky::new(cap).ok_or(QdaError::Singular { class })?;
        let l = chol.l();
        let log_det = dvec.iter().map(|v| v.ln()).sum::<f64>()
            + 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        (
            Precision::LowRank {
                inv_sqrt_d,
                w: column_major(&w),
                k: n,
                chol: column_major(&l),
            },
            log_det,
        )
    };
    if !log_det.is_finite() {
        return Err(QdaError::Singular { class });
    }
    Ok(GaussianClass {
        log_prior,
        mean,
        log_det,
        form,
    })
}

impl GaussianClass {
    /// Mahalanobis distance `(x−μ)ᵀΣ⁻¹(x−μ)`.
    fn mahalanobis(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        let z = DVector::from_iterator(d, x.iter().zip(&self.mean).map(|(a, m)| a - m));
        match &self.form {
            Precision::Dense { chol } => {
                lower_solve(DMatrixView::from_slice(chol, d, d), &z).norm_squared()
            }
            Precision::LowRank {
                inv_sqrt_d,
                w,
                k,
                chol,
            } => {
                let zs = DVector::from_iterator(d, z.iter().zip(inv_sqrt_d).map(|(a, s)| a * s));
                let b = DMatrixView::from_slice(w, d, *k).tr_mul(&zs);
                zs.norm_squared() - lower_solve(DMatrixView::from_slice(chol, *k, *k), &b).norm_squared()
            }
        }
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.log_prior - 0.5 * self.log_det - 0.5 * self.mahalanobis(x)
    }
}

pub fn fit_qda(x: &FeatureMatrix, y: &[bool], gamma: f64, epsilon: f64) -> Result<QdaParams, QdaError> {
    let mut neg = Vec::new();
    let mut pos = Vec::new();
    for (i, &label) in y.iter().enumerate() {
        if label {
            pos.push(x.row(i));
        } else {
            neg.push(x.row(i));
        }
    }
    let n = y.len();
    Ok(QdaParams {
        classes: [
            fit_class(&neg, n, gamma, epsilon, 0)?,
            fit_class(&pos, n, gamma, epsilon, 1)?,
        ],
    })
}

impl QdaParams {
    /// Positive-class log posterior minus negative-class log posterior.
    pub fn score(&self, x: &[f64]) -> f64 {
        self.classes[1].log_density(x) - self.classes[0].log_density(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng as _;

    fn data(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let d = rows[0].len();
        FeatureMatrix::from_rows(
            (0..rows.len()).map(|i| i.to_string()).collect(),
            (0..d).map(|j| format!("x{j}")).collect(),
            rows,
        )
        .unwrap()
    }

    /// Direct evaluation with the full covariance.
    fn brute_force(params: &GaussianClass, rows: &[Vec<f64>], gamma: f64, eps: f64, x: &[f64]) -> f64 {
        let n = rows.len();
        let d = x.len();
        let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        let mut s = DMatrix::<f64>::zeros(d, d);
        for r in rows {
            let z = DVector::from_iterator(d, r.iter().zip(&mean).map(|(a, m)| a - m));
            s += &z * z.transpose();
        }
        s /= (n - 1) as f64;
        let mut sigma = s.clone() * (1.0 - gamma);
        for j in 0..d {
            sigma[(j, j)] += gamma * s[(j, j)] + eps;
        }
        let inv = sigma.clone().try_inverse().unwrap();
        let z = DVector::from_iterator(d, x.iter().zip(&mean).map(|(a, m)| a - m));
        let maha = (z.transpose() * inv * &z)[(0, 0)];
        params.log_prior - 0.5 * sigma.determinant().ln() - 0.5 * maha
    }

    #[test]
    fn low_rank_form_matches_full_covariance() {
        let mut r = rng::rng(11);
        let d = 7;
        let neg: Vec<Vec<f64>> = (0..4).map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let pos: Vec<Vec<f64>> = (0..5).map(|_| (0..d).map(|_| r.random_range(0.0..2.0)).collect()).collect();
        let mut rows = neg.clone();
        rows.extend(pos.clone());
        let y: Vec<bool> = (0..9).map(|i| i >= 4).collect();
        let q = fit_qda(&data(rows), &y, 0.3, 1e-3).unwrap();
        assert!(matches!(q.classes[0].form, Precision::LowRank { .. }));
        let probe: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..2.0)).collect();
        for (c, rows) in [(0, &neg), (1, &pos)] {
            let want = brute_force(&q.classes[c], rows, 0.3, 1e-3, &probe);
            let got = q.classes[c].log_density(&probe);
            assert!((want - got).abs() < 1e-8 * want.abs().max(1.0), "{want} vs {got}");
        }
    }

    #[test]
    fn dense_form_matches_full_covariance() {
        let mut r = rng::rng(12);
        let rows: Vec<Vec<f64>> = (0..12).map(|_| (0..3).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<bool> = (0..12).map(|i| i % 2 == 0).collect();
        let q = fit_qda(&data(rows.clone()), &y, 0.5, 1e-6).unwrap();
        assert!(matches!(q.classes[1].form, Precision::Dense { .. }));
        let pos: Vec<Vec<f64>> = rows.iter().step_by(2).cloned().collect();
        let want = brute_force(&q.classes[1], &pos, 0.5, 1e-6, &[0.1, 0.2, -0.3]);
        assert!((want - q.classes[1].log_density(&[0.1, 0.2, -0.3])).abs() < 1e-9);
    }

    #[test]
    fn constant_feature_without_ridge_is_singular() {
        let rows = vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![1.5, 0.0], vec![3.0, 0.0]];
        let y = [true, true, false, false];
        let err = fit_qda(&data(rows), &y, 0.5, 0.0).unwrap_err();
        assert!(matches!(err, QdaError::Singular { .. }));
    }
}
