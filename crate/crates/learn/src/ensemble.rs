//! Tree ensembles: averaged forests and additive boosting.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tree::{check_width, RegressionTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Combination {
    /// Mean of the tree outputs.
    Average,
    /// `base_score + learning_rate * Σ tree`.
    Boosting { learning_rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub trees: Vec<RegressionTree>,
    pub combination: Combination,
    pub base_score: f64,
    pub n_features: usize,
    /// Mean squared training loss before the first round and after each round (boosting only).
    #[serde(default)]
    pub train_loss: Vec<f64>,
}

impl TreeEnsemble {
    /// Weight applied to each tree output.
    pub fn tree_weight(&self) -> f64 {
        match self.combination {
            Combination::Average => 1.0 / self.trees.len().max(1) as f64,
            Combination::Boosting { learning_rate } => learning_rate,
        }
    }

    pub fn predict_with(&self, x: impl Fn(usize) -> f64 + Copy) -> f64 {
        let w = self.tree_weight();
        match self.combination {
            Combination::Average => self.trees.iter().map(|t| t.predict_with(x)).sum::<f64>() / self.trees.len().max(1) as f64,
            Combination::Boosting { .. } => {
                self.trees.iter().fold(self.base_score, |acc, t| acc + w * t.predict_with(x))
            }
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.predict_with(|f| x[f])
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        check_width(x, self.n_features)?;
        Ok((0..x.nrows()).map(|i| self.predict_with(|f| x[(i, f)])).collect())
    }
}
