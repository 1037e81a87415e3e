//! Bootstrap-aggregated CART forests.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{check_finite, BinnedMatrix};
use crate::ensemble::{Combination, TreeEnsemble};
use crate::error::{LearnError, Result};
use crate::seed::derive_seed;
use crate::tree::{grow, validate_tree_params, GrowConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Share of the non-constant features drawn at every node.
    pub feature_fraction: f64,
    pub bootstrap: bool,
    /// 0 means unlimited.
    pub max_depth: usize,
    pub min_samples_leaf: f64,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 300, feature_fraction: 1.0 / 3.0, bootstrap: true, max_depth: 0, min_samples_leaf: 1.0, seed: 0 }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(LearnError::InvalidParam("n_trees must be positive".into()));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(LearnError::InvalidParam(format!("feature_fraction must be in (0, 1], got {}", self.feature_fraction)));
        }
        validate_tree_params(self.min_samples_leaf)
    }
}

pub fn fit_random_forest(x: &DMatrix<f64>, y: &[f64], params: &ForestParams) -> Result<TreeEnsemble> {
    check_finite(x, y)?;
    params.validate()?;
    let data = BinnedMatrix::new(x, None);
    let n = y.len();
    let mut cfg = GrowConfig::new(params.max_depth, params.min_samples_leaf, 0.0);
    let k = ((params.feature_fraction * data.active.len() as f64).floor() as usize).max(1);
    if k < data.active.len() {
        cfg.node_features = Some(k);
    }
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, t as u64));
            let mut w = vec![0.0; n];
            if params.bootstrap {
                for _ in 0..n {
                    w[rng.random_range(0..n)] += 1.0;
                }
            } else {
                w.iter_mut().for_each(|v| *v = 1.0);
            }
            let g: Vec<f64> = w.iter().zip(y).map(|(w, y)| -w * y).collect();
            grow(&data, &g, &w, &data.active, &cfg, &mut rng)
        })
        .collect();
    Ok(TreeEnsemble { trees, combination: Combination::Average, base_score: 0.0, n_features: x.ncols(), train_loss: Vec::new() })
}
