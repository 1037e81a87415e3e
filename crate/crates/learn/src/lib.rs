//! From-scratch regression learners for small tabular problems: CART trees,
//! random forests, exact and histogram gradient boosting, ridge and Bayesian
//! ridge, a stacked/voted mixture of those, and exact TreeSHAP attributions.
//!
//! Feature matrices are `nalgebra::DMatrix<f64>` with one row per sample.

mod binning;
pub mod boost;
pub mod ensemble;
pub mod error;
pub mod forest;
pub mod linear;
pub mod mixture;
pub mod persist;
pub mod seed;
pub mod shap;
pub mod tree;

pub use boost::{fit_gbm, fit_hist_gbm, GbmParams, HistGbmParams, Order};
pub use ensemble::{Combination, TreeEnsemble};
pub use error::{LearnError, Result};
pub use forest::{fit_random_forest, ForestParams};
pub use linear::{fit_bayesian_ridge, fit_ridge, LinearModel, Regularization};
pub use mixture::{
    assign_folds, default_base_learners, fit_mixture, BaseLearner, FoldReport, LearnerSpec, MixtureFit, MixtureModel,
    MixtureParams, MixtureParts, NamedModel, Normalization,
};
pub use nalgebra::DMatrix;
pub use seed::derive_seed;
pub use shap::{
    decision_data, expected_value, explain_mixture, explain_trees, mean_abs_shap, mixture_shap, shap_tree, shap_trees,
    Contribution, DecisionRecord, Explanation, Importance,
};
pub use tree::{fit_tree, Growth, Node, RegressionTree, Split, TreeParams};
