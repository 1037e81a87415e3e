//! Stacked-and-voted mixture of base learners.
//!
//! Base learners see z-scored features. Their out-of-fold predictions train
//! a Bayesian ridge meta-model; the final output blends that stacker with
//! the single base learner that had the lowest out-of-fold squared error.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::{fit_gbm, fit_hist_gbm, GbmParams, HistGbmParams, Order};
use crate::ensemble::TreeEnsemble;
use crate::error::{LearnError, Result};
use crate::forest::{fit_random_forest, ForestParams};
use crate::linear::{fit_bayesian_ridge, LinearModel};
use crate::seed::derive_seed;
use crate::tree::check_width;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    RandomForest(ForestParams),
    Gbm(GbmParams),
    HistGbm(HistGbmParams),
}

impl LearnerSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::RandomForest(p) => p.validate(),
            LearnerSpec::Gbm(p) => p.validate(),
            LearnerSpec::HistGbm(p) => p.validate(),
        }
    }

    /// Fit with the spec's own seed replaced by `seed`.
    pub fn fit(&self, x: &DMatrix<f64>, y: &[f64], seed: u64) -> Result<TreeEnsemble> {
        match self {
            LearnerSpec::RandomForest(p) => fit_random_forest(x, y, &ForestParams { seed, ..p.clone() }),
            LearnerSpec::Gbm(p) => fit_gbm(x, y, &GbmParams { seed, ..p.clone() }),
            LearnerSpec::HistGbm(p) => fit_hist_gbm(x, y, &HistGbmParams { seed, ..p.clone() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseLearner {
    pub name: String,
    pub spec: LearnerSpec,
}

/// The four default base learners: forest, first- and second-order boosting, histogram boosting.
pub fn default_base_learners() -> Vec<BaseLearner> {
    vec![
        BaseLearner { name: "random_forest".into(), spec: LearnerSpec::RandomForest(ForestParams::default()) },
        BaseLearner { name: "gbm".into(), spec: LearnerSpec::Gbm(GbmParams::default()) },
        BaseLearner {
            name: "gbm_newton".into(),
            spec: LearnerSpec::Gbm(GbmParams { order: Order::Second, ..GbmParams::default() }),
        },
        BaseLearner { name: "hist_gbm".into(), spec: LearnerSpec::HistGbm(HistGbmParams::default()) },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub k_folds: usize,
    pub seed: u64,
    /// Weights on (stacker, best base).
    pub voting_weights: [f64; 2],
    pub base_learners: Vec<BaseLearner>,
}

impl Default for MixtureParams {
    fn default() -> Self {
        MixtureParams { k_folds: 5, seed: 0, voting_weights: [0.5, 0.5], base_learners: default_base_learners() }
    }
}

impl MixtureParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_folds < 2 {
            return Err(LearnError::InvalidParam(format!("k_folds must be >= 2, got {}", self.k_folds)));
        }
        let [a, b] = self.voting_weights;
        if !(a >= 0.0 && b >= 0.0 && (a + b - 1.0).abs() < 1e-9) {
            return Err(LearnError::InvalidParam(format!("voting weights must be non-negative and sum to 1, got ({a}, {b})")));
        }
        if self.base_learners.is_empty() {
            return Err(LearnError::InvalidParam("at least one base learner is required".into()));
        }
        for (i, b) in self.base_learners.iter().enumerate() {
            if self.base_learners[..i].iter().any(|o| o.name == b.name) {
                return Err(LearnError::InvalidParam(format!("duplicate base learner name `{}`", b.name)));
            }
            b.spec.validate()?;
        }
        Ok(())
    }
}

/// Per-feature z-score statistics. Constant features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Normalization {
    pub fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows() as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut std = Vec::with_capacity(x.ncols());
        let mut constant = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let first = col[0];
            let m = col.iter().sum::<f64>() / n;
            let v = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let is_const = col.iter().all(|&v| v == first) || v.sqrt() == 0.0;
            mean.push(m);
            std.push(if is_const { 1.0 } else { v.sqrt() });
            constant.push(is_const);
        }
        Normalization { mean, std, constant }
    }

    #[inline]
    pub fn apply_value(&self, j: usize, v: f64) -> f64 {
        if self.constant[j] {
            0.0
        } else {
            (v - self.mean[j]) / self.std[j]
        }
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| self.apply_value(j, x[(i, j)]))
    }

    pub fn apply_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(j, &v)| self.apply_value(j, v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedModel {
    pub name: String,
    pub model: TreeEnsemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub base_models: Vec<NamedModel>,
    /// Linear model over base predictions, in `base_models` order.
    pub meta_model: LinearModel,
    pub best_base: usize,
    pub voting_weights: [f64; 2],
    pub normalization: Normalization,
    pub feature_layout: Vec<String>,
}

/// Per-row outputs of every stage.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParts {
    pub base: Vec<f64>,
    pub stacker: f64,
    pub prediction: f64,
}

impl MixtureModel {
    pub fn n_features(&self) -> usize {
        self.feature_layout.len()
    }

    pub fn best_base_name(&self) -> &str {
        &self.base_models[self.best_base].name
    }

    /// Error unless `layout` equals the training layout column for column.
    pub fn check_layout(&self, layout: &[String]) -> Result<()> {
        for i in 0..self.feature_layout.len().max(layout.len()) {
            let expected = self.feature_layout.get(i).map_or("<none>", |s| s.as_str());
            let got = layout.get(i).map_or("<none>", |s| s.as_str());
            if expected != got {
                return Err(LearnError::LayoutMismatch { index: i, expected: expected.into(), got: got.into() });
            }
        }
        Ok(())
    }

    pub fn combine(&self, base: Vec<f64>) -> MixtureParts {
        let stacker = self.meta_model.predict_row(&base);
        let [v_stack, v_best] = self.voting_weights;
        let prediction = v_stack * stacker + v_best * base[self.best_base];
        MixtureParts { base, stacker, prediction }
    }

    /// Stage outputs for one raw (unnormalised) feature row.
    pub fn parts_row(&self, x: &[f64]) -> Result<MixtureParts> {
        if x.len() != self.n_features() {
            return Err(LearnError::DimensionMismatch { expected: self.n_features(), got: x.len() });
        }
        let z = self.normalization.apply_row(x);
        Ok(self.combine(self.base_models.iter().map(|m| m.model.predict_row(&z)).collect()))
    }

    pub fn parts(&self, x: &DMatrix<f64>) -> Result<Vec<MixtureParts>> {
        check_width(x, self.n_features())?;
        let z = self.normalization.apply(x);
        Ok((0..z.nrows())
            .map(|i| self.combine(self.base_models.iter().map(|m| m.model.predict_with(|f| z[(i, f)])).collect()))
            .collect())
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        Ok(self.parts(x)?.into_iter().map(|p| p.prediction).collect())
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        Ok(self.parts_row(x)?.prediction)
    }
}

/// Out-of-fold bookkeeping from a mixture fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    /// Fold holding out each training row.
    pub fold_of: Vec<usize>,
    /// `oof[m][i]`: base learner `m` on row `i`, trained without `i`'s fold.
    pub oof: Vec<Vec<f64>>,
    /// Out-of-fold sum of squared errors per base learner.
    pub sse: Vec<f64>,
    /// Out-of-fold R² per base learner; `None` for a constant target.
    pub r2: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFit {
    pub model: MixtureModel,
    pub folds: FoldReport,
}

/// Balanced seeded fold assignment: shuffled rows dealt round-robin.
pub fn assign_folds(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold_of[row] = pos % k;
    }
    fold_of
}

fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

pub fn fit_mixture(x: &DMatrix<f64>, y: &[f64], layout: Vec<String>, params: &MixtureParams) -> Result<MixtureFit> {
    params.validate()?;
    let n = y.len();
    if x.nrows() != n {
        return Err(LearnError::DimensionMismatch { expected: x.nrows(), got: n });
    }
    if layout.len() != x.ncols() {
        return Err(LearnError::DimensionMismatch { expected: x.ncols(), got: layout.len() });
    }
    let need = 2 * params.k_folds;
    if n < need {
        return Err(LearnError::TooFewSamples { need, got: n });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::DegenerateTarget("non-finite target".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite("features"));
    }

    let normalization = Normalization::fit(x);
    let z = normalization.apply(x);
    let k = params.k_folds;
    let fold_of = assign_folds(n, k, derive_seed(params.seed, 0xf01d));
    let folds: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .map(|f| ((0..n).filter(|&i| fold_of[i] != f).collect(), (0..n).filter(|&i| fold_of[i] == f).collect()))
        .collect();
    let learner_seed = |m: usize, fold: usize| derive_seed(derive_seed(params.seed, m as u64 + 1), fold as u64);

    let m_count = params.base_learners.len();
    let jobs: Vec<(usize, usize)> = (0..m_count).flat_map(|m| (0..=k).map(move |f| (m, f))).collect();
    // fold index k means "all rows"
    let fitted: Vec<Result<TreeEnsemble>> = jobs
        .par_iter()
        .map(|&(m, f)| {
            let spec = &params.base_learners[m].spec;
            if f == k {
                spec.fit(&z, y, learner_seed(m, f))
            } else {
                let (train, _) = &folds[f];
                let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
                spec.fit(&select_rows(&z, train), &ty, learner_seed(m, f))
            }
        })
        .collect();

    let mut oof = vec![vec![0.0; n]; m_count];
    let mut base_models = Vec::with_capacity(m_count);
    for (&(m, f), model) in jobs.iter().zip(fitted) {
        let model = model?;
        if f == k {
            base_models.push(NamedModel { name: params.base_learners[m].name.clone(), model });
        } else {
            for &i in &folds[f].1 {
                oof[m][i] = model.predict_with(|c| z[(i, c)]);
            }
        }
    }

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    let sse: Vec<f64> = oof.iter().map(|p| p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()).collect();
    let constant_y = y.iter().all(|&v| v == y[0]);
    let r2 = sse.iter().map(|s| if constant_y || ss_tot == 0.0 { None } else { Some(1.0 - s / ss_tot) }).collect();
    let mut best_base = 0;
    for m in 1..m_count {
        if sse[m] < sse[best_base] {
            best_base = m;
        }
    }

    let meta_x = DMatrix::from_fn(n, m_count, |i, m| oof[m][i]);
    let meta_model = fit_bayesian_ridge(&meta_x, y)?;

    let model = MixtureModel { base_models, meta_model, best_base, voting_weights: params.voting_weights, normalization, feature_layout: layout };
    Ok(MixtureFit { model, folds: FoldReport { fold_of, oof, sse, r2 } })
}
