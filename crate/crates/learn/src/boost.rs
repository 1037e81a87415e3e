//! Gradient boosting on squared loss, exact and histogram-binned.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binning::{check_finite, BinnedMatrix};
use crate::ensemble::{Combination, TreeEnsemble};
use crate::error::{LearnError, Result};
use crate::seed::derive_seed;
use crate::tree::{grow, validate_tree_params, GrowConfig, Growth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// Leaves are mean residuals; no leaf penalty.
    First,
    /// Newton leaves `-G / (H + l2_leaf)`.
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbmParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    /// 0 means unlimited.
    pub max_depth: usize,
    pub order: Order,
    pub l2_leaf: f64,
    pub min_samples_leaf: f64,
    /// Share of the non-constant features drawn for each tree.
    pub feature_fraction: f64,
    pub seed: u64,
}

impl Default for GbmParams {
    fn default() -> Self {
        GbmParams {
            n_rounds: 500,
            learning_rate: 0.05,
            max_depth: 6,
            order: Order::First,
            l2_leaf: 1.0,
            min_samples_leaf: 1.0,
            feature_fraction: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistGbmParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    /// 0 means unlimited.
    pub max_depth: usize,
    /// 0 means unlimited.
    pub max_leaves: usize,
    pub n_bins: usize,
    pub growth: Growth,
    pub l2_leaf: f64,
    pub min_samples_leaf: f64,
    pub feature_fraction: f64,
    pub seed: u64,
}

impl Default for HistGbmParams {
    fn default() -> Self {
        HistGbmParams {
            n_rounds: 500,
            learning_rate: 0.05,
            max_depth: 0,
            max_leaves: 31,
            n_bins: 255,
            growth: Growth::LeafWise,
            l2_leaf: 0.0,
            min_samples_leaf: 20.0,
            feature_fraction: 1.0,
            seed: 0,
        }
    }
}

fn check_common(learning_rate: f64, l2_leaf: f64, feature_fraction: f64, min_samples_leaf: f64) -> Result<()> {
    if !(learning_rate > 0.0 && learning_rate <= 1.0) {
        return Err(LearnError::InvalidParam(format!("learning_rate must be in (0, 1], got {learning_rate}")));
    }
    if !(l2_leaf >= 0.0 && l2_leaf.is_finite()) {
        return Err(LearnError::InvalidParam(format!("l2_leaf must be >= 0, got {l2_leaf}")));
    }
    if !(feature_fraction > 0.0 && feature_fraction <= 1.0) {
        return Err(LearnError::InvalidParam(format!("feature_fraction must be in (0, 1], got {feature_fraction}")));
    }
    validate_tree_params(min_samples_leaf)
}

impl GbmParams {
    pub fn validate(&self) -> Result<()> {
        check_common(self.learning_rate, self.l2_leaf, self.feature_fraction, self.min_samples_leaf)
    }
}

impl HistGbmParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(LearnError::InvalidParam(format!("n_bins must be >= 2, got {}", self.n_bins)));
        }
        if self.max_leaves == 1 {
            return Err(LearnError::InvalidParam("max_leaves must be 0 or >= 2".into()));
        }
        check_common(self.learning_rate, self.l2_leaf, self.feature_fraction, self.min_samples_leaf)
    }
}

struct Plan<'a> {
    n_rounds: usize,
    learning_rate: f64,
    feature_fraction: f64,
    seed: u64,
    cfg: &'a GrowConfig,
}

fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64
}

fn boost(x: &DMatrix<f64>, y: &[f64], data: &BinnedMatrix, plan: Plan<'_>) -> TreeEnsemble {
    let n = y.len();
    let base = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base; n];
    let h = vec![1.0; n];
    let mut trees = Vec::with_capacity(plan.n_rounds);
    let mut train_loss = vec![mse(&pred, y)];
    let k = ((plan.feature_fraction * data.active.len() as f64).floor() as usize).max(1);
    for round in 0..plan.n_rounds {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, round as u64));
        let allowed: Vec<usize> = if k < data.active.len() {
            let mut idx = sample(&mut rng, data.active.len(), k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| data.active[i]).collect()
        } else {
            data.active.clone()
        };
        let g: Vec<f64> = pred.iter().zip(y).map(|(p, t)| p - t).collect();
        let tree = grow(data, &g, &h, &allowed, plan.cfg, &mut rng);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += plan.learning_rate * tree.predict_with(|f| x[(i, f)]);
        }
        let loss = mse(&pred, y);
        debug_assert!(loss <= train_loss[round] * (1.0 + 1e-12) + 1e-300, "round {round}: loss rose");
        train_loss.push(loss);
        trees.push(tree);
    }
    TreeEnsemble {
        trees,
        combination: Combination::Boosting { learning_rate: plan.learning_rate },
        base_score: base,
        n_features: x.ncols(),
        train_loss,
    }
}

/// Depth-wise boosting with exact split search.
pub fn fit_gbm(x: &DMatrix<f64>, y: &[f64], params: &GbmParams) -> Result<TreeEnsemble> {
    check_finite(x, y)?;
    params.validate()?;
    let data = BinnedMatrix::new(x, None);
    let lambda = match params.order {
        Order::First => 0.0,
        Order::Second => params.l2_leaf,
    };
    let cfg = GrowConfig::new(params.max_depth, params.min_samples_leaf, lambda);
    let plan = Plan {
        n_rounds: params.n_rounds,
        learning_rate: params.learning_rate,
        feature_fraction: params.feature_fraction,
        seed: params.seed,
        cfg: &cfg,
    };
    Ok(boost(x, y, &data, plan))
}

/// Newton boosting over quantile-binned features with best-first growth.
pub fn fit_hist_gbm(x: &DMatrix<f64>, y: &[f64], params: &HistGbmParams) -> Result<TreeEnsemble> {
    check_finite(x, y)?;
    params.validate()?;
    let data = BinnedMatrix::new(x, Some(params.n_bins));
    let mut cfg = GrowConfig::new(params.max_depth, params.min_samples_leaf, params.l2_leaf);
    cfg.histogram = true;
    cfg.growth = params.growth;
    cfg.max_leaves = if params.max_leaves == 0 { usize::MAX } else { params.max_leaves };
    let plan = Plan {
        n_rounds: params.n_rounds,
        learning_rate: params.learning_rate,
        feature_fraction: params.feature_fraction,
        seed: params.seed,
        cfg: &cfg,
    };
    Ok(boost(x, y, &data, plan))
}
