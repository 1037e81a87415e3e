//! Ridge and Bayesian ridge regression.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::binning::check_finite;
use crate::error::{LearnError, Result};
use crate::tree::check_width;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Regularization {
    Ridge { lambda: f64 },
    /// `alpha` is the weight precision, `beta` the noise precision.
    Bayesian { alpha: f64, beta: f64, iterations: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub regularization: Regularization,
}

impl LinearModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).fold(self.intercept, |acc, (w, v)| acc + w * v)
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        check_width(x, self.weights.len())?;
        Ok((0..x.nrows())
            .map(|i| (0..x.ncols()).fold(self.intercept, |acc, j| acc + self.weights[j] * x[(i, j)]))
            .collect())
    }
}

/// Hyperprior shape/rate parameters for both precisions.
const PRIOR: f64 = 1e-6;
pub const BAYES_MAX_ITER: usize = 300;
pub const BAYES_TOL: f64 = 1e-6;

fn center(x: &DMatrix<f64>, y: &[f64]) -> (DMatrix<f64>, DVector<f64>, Vec<f64>, f64) {
    let n = x.nrows();
    let means: Vec<f64> = (0..x.ncols()).map(|j| x.column(j).iter().sum::<f64>() / n as f64).collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let xc = DMatrix::from_fn(n, x.ncols(), |i, j| x[(i, j)] - means[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    (xc, yc, means, y_mean)
}

fn intercept(weights: &[f64], means: &[f64], y_mean: f64) -> f64 {
    y_mean - weights.iter().zip(means).map(|(w, m)| w * m).sum::<f64>()
}

/// Closed-form ridge on centred data; the intercept is not penalised.
pub fn fit_ridge(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<LinearModel> {
    check_finite(x, y)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(LearnError::InvalidParam(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    let (xc, yc, means, y_mean) = center(x, y);
    let p = x.ncols();
    let gram = xc.transpose() * &xc + DMatrix::identity(p, p) * lambda;
    let rhs = xc.transpose() * yc;
    let w = gram.cholesky().ok_or(LearnError::SingularDesign)?.solve(&rhs);
    let weights: Vec<f64> = w.iter().copied().collect();
    Ok(LinearModel { intercept: intercept(&weights, &means, y_mean), weights, regularization: Regularization::Ridge { lambda } })
}

/// Evidence maximisation over the weight and noise precisions.
///
/// Iterates the MacKay updates on the SVD of the centred design until both
/// precisions change by less than `1e-6` relative, or 300 iterations pass.
pub fn fit_bayesian_ridge(x: &DMatrix<f64>, y: &[f64]) -> Result<LinearModel> {
    check_finite(x, y)?;
    let n = x.nrows();
    if n < 2 {
        return Err(LearnError::TooFewSamples { need: 2, got: n });
    }
    let p = x.ncols();
    let (xc, yc, means, y_mean) = center(x, y);
    let svd = xc.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or(LearnError::SingularDesign)?;
    let vt = svd.v_t.as_ref().ok_or(LearnError::SingularDesign)?;
    let s = &svd.singular_values;
    let uty = u.transpose() * &yc;
    let eig: Vec<f64> = s.iter().map(|v| v * v).collect();

    let var = yc.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let mut beta = 1.0 / (var + f64::EPSILON);
    let mut alpha = 1.0;

    let solve = |alpha: f64, beta: f64| -> DVector<f64> {
        let ratio = alpha / beta;
        let mut coef = DVector::zeros(p);
        for k in 0..s.len() {
            if s[k] > 0.0 {
                let c = s[k] / (eig[k] + ratio) * uty[k];
                coef += vt.row(k).transpose() * c;
            }
        }
        coef
    };

    let mut iterations = 0;
    for _ in 0..BAYES_MAX_ITER {
        iterations += 1;
        let coef = solve(alpha, beta);
        let resid = &yc - &xc * &coef;
        let rss = resid.norm_squared();
        let gamma: f64 = eig.iter().map(|&e| beta * e / (alpha + beta * e)).sum();
        let alpha_new = (gamma + 2.0 * PRIOR) / (coef.norm_squared() + 2.0 * PRIOR);
        let beta_new = (n as f64 - gamma + 2.0 * PRIOR) / (rss + 2.0 * PRIOR);
        if !alpha_new.is_finite() || !beta_new.is_finite() {
            return Err(LearnError::SingularDesign);
        }
        let done = ((alpha_new - alpha) / alpha).abs() < BAYES_TOL && ((beta_new - beta) / beta).abs() < BAYES_TOL;
        alpha = alpha_new;
        beta = beta_new;
        if done {
            break;
        }
    }
    let coef = solve(alpha, beta);
    if coef.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::SingularDesign);
    }
    let weights: Vec<f64> = coef.iter().copied().collect();
    Ok(LinearModel {
        intercept: intercept(&weights, &means, y_mean),
        weights,
        regularization: Regularization::Bayesian { alpha, beta, iterations },
    })
}
