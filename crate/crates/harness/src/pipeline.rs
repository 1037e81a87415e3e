//! Training, persistence, prediction and explanation of model bundles.

use std::path::Path;

use diazoir::Featurizer;
use diazoir_learn::{decision_data, explain_mixture, fit_mixture, mean_abs_shap, persist, DecisionRecord, MixtureModel};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};
use crate::features::FeatureSet;
use crate::metrics::{carbonyl_count, metrics, pearson, EvalReport};
use crate::split::{split, Split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub seed: u64,
    pub test_fraction: f64,
    pub n_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub dataset_digest: String,
}

/// Everything needed to featurise new SMILES and predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub featurizer: Featurizer,
    pub config_hash: String,
    pub seed: u64,
    pub split: SplitInfo,
    pub mixture: MixtureModel,
}

impl ModelBundle {
    pub fn to_json(&self) -> Result<String> {
        Ok(persist::to_json(self)?)
    }

    /// Parse and check that the stored layout matches the stored featurizer.
    pub fn from_json(text: &str) -> Result<ModelBundle> {
        let b: ModelBundle = persist::from_json(text)?;
        b.mixture.check_layout(&b.featurizer.layout())?;
        Ok(b)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<ModelBundle> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        ModelBundle::from_json(&text).map_err(|e| match e {
            HarnessError::Learn(diazoir_learn::LearnError::Format(j)) => HarnessError::format(path, j),
            other => other,
        })
    }

    pub fn features(&self, ds: &Dataset) -> Result<FeatureSet> {
        FeatureSet::build(ds, &self.featurizer)
    }

    pub fn predict_smiles(&self, smiles: &str) -> Result<f64> {
        let row = self.featurizer.featurize_smiles(smiles)?;
        Ok(self.mixture.predict_row(&row.values)?)
    }

    /// Rebuild the training split when `ds` is the training dataset.
    pub fn recover_split(&self, ds: &Dataset) -> Result<Split> {
        if ds.digest() != self.split.dataset_digest {
            return Err(HarnessError::Invalid(format!(
                "{} is not the dataset this model was trained on (digest {} vs {})",
                ds.source,
                ds.digest(),
                self.split.dataset_digest
            )));
        }
        split(ds.len(), self.split.test_fraction, self.split.seed)
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseScore {
    pub name: String,
    #[serde(flatten)]
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaWeight {
    pub name: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub dataset_digest: String,
    pub n_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub feature_width: usize,
    pub combo_table: String,
    pub best_base: String,
    pub voting_weights: [f64; 2],
    pub meta_intercept: f64,
    pub meta_weights: Vec<MetaWeight>,
    /// Out-of-fold scores of each base learner on the training rows.
    pub out_of_fold: Vec<BaseScore>,
    pub test: EvalReport,
    pub test_base: Vec<BaseScore>,
}

pub struct Trained {
    pub bundle: ModelBundle,
    pub report: TrainReport,
    pub split: Split,
    pub train: FeatureSet,
    pub test: FeatureSet,
}

/// Split, featurise, fit the mixture on the training rows and score the held-out rows.
pub fn train(ds: &Dataset, cfg: &Config) -> Result<Trained> {
    let featurizer = cfg.featurizer()?;
    let all = FeatureSet::build(ds, &featurizer)?;
    let sp = split(ds.len(), cfg.split.test_fraction, cfg.seed)?;
    let train = all.subset(&sp.train);
    let test = all.subset(&sp.test);
    let params = cfg.mixture_params();
    if train.len() < params.k_folds {
        return Err(HarnessError::TooFewRows { need: params.k_folds, got: train.len() });
    }
    let fit = fit_mixture(&train.x, &train.y, featurizer.layout(), &params)?;
    let model = fit.model;
    let out_of_fold = model
        .base_models
        .iter()
        .zip(&fit.folds.oof)
        .map(|(m, oof)| Ok(BaseScore { name: m.name.clone(), report: metrics(&train.y, oof)? }))
        .collect::<Result<Vec<_>>>()?;
    let parts = model.parts(&test.x)?;
    let pred: Vec<f64> = parts.iter().map(|p| p.prediction).collect();
    let test_base = model
        .base_models
        .iter()
        .enumerate()
        .map(|(m, named)| {
            let p: Vec<f64> = parts.iter().map(|r| r.base[m]).collect();
            Ok(BaseScore { name: named.name.clone(), report: metrics(&test.y, &p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = TrainReport {
        dataset_digest: ds.digest(),
        n_rows: ds.len(),
        n_train: train.len(),
        n_test: test.len(),
        feature_width: featurizer.width(),
        combo_table: featurizer.table.version().to_string(),
        best_base: model.best_base_name().to_string(),
        voting_weights: model.voting_weights,
        meta_intercept: model.meta_model.intercept,
        meta_weights: model
            .base_models
            .iter()
            .zip(&model.meta_model.weights)
            .map(|(m, &w)| MetaWeight { name: m.name.clone(), weight: w })
            .collect(),
        out_of_fold,
        test: metrics(&test.y, &pred)?,
        test_base,
    };
    let bundle = ModelBundle {
        featurizer,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        split: SplitInfo {
            seed: cfg.seed,
            test_fraction: cfg.split.test_fraction,
            n_rows: ds.len(),
            n_train: train.len(),
            n_test: test.len(),
            dataset_digest: ds.digest(),
        },
        mixture: model,
    };
    Ok(Trained { bundle, report, split: sp, train, test })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    /// Held-out rows when the dataset is the training dataset, otherwise every row.
    Auto,
    Test,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRow {
    pub id: String,
    pub wavenumber_cm1: f64,
    pub prediction: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalOutput {
    pub dataset_digest: String,
    pub subset: Subset,
    pub metrics: EvalReport,
    /// Pearson correlation of O_DOUBLE_R1 + O_DOUBLE_R2 with the wavenumber; `None` when either is constant.
    pub carbonyl_correlation: Option<f64>,
    pub predictions: Vec<PredictionRow>,
}

pub fn evaluate(bundle: &ModelBundle, ds: &Dataset, subset: Subset) -> Result<EvalOutput> {
    let (subset, rows) = match subset {
        Subset::All => (Subset::All, (0..ds.len()).collect()),
        Subset::Test => (Subset::Test, bundle.recover_split(ds)?.test),
        Subset::Auto => match bundle.recover_split(ds) {
            Ok(s) => (Subset::Test, s.test),
            Err(_) => (Subset::All, (0..ds.len()).collect()),
        },
    };
    let fs = bundle.features(&ds.subset(&rows))?;
    let pred = bundle.mixture.predict(&fs.x)?;
    let carbonyl: Vec<f64> = fs.samd.iter().map(|s| carbonyl_count(s, &bundle.featurizer.table) as f64).collect();
    Ok(EvalOutput {
        dataset_digest: ds.digest(),
        subset,
        metrics: metrics(&fs.y, &pred)?,
        carbonyl_correlation: pearson(&carbonyl, &fs.y).ok(),
        predictions: fs
            .ids
            .iter()
            .zip(&fs.y)
            .zip(&pred)
            .map(|((id, &t), &p)| PredictionRow { id: id.clone(), wavenumber_cm1: t, prediction: p, residual: t - p })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedShap {
    pub feature: String,
    pub value: f64,
    pub shap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainReport {
    pub smiles: String,
    pub base_value: f64,
    pub prediction: f64,
    /// Sum of every contribution outside `top`.
    pub other: f64,
    pub additivity_error: f64,
    /// Largest `|shap|` first.
    pub top: Vec<NamedShap>,
    pub decision: Vec<DecisionRecord>,
}

pub fn explain(bundle: &ModelBundle, smiles: &str, top_k: usize) -> Result<ExplainReport> {
    let row = bundle.featurizer.featurize_smiles(smiles)?;
    let expl = explain_mixture(&bundle.mixture, &row.values)?;
    let top: Vec<NamedShap> = expl
        .top(top_k)
        .into_iter()
        .map(|c| NamedShap { feature: c.feature.clone(), value: c.value, shap: c.shap })
        .collect();
    let total: f64 = expl.contributions.iter().map(|c| c.shap).sum();
    let shown: f64 = top.iter().map(|c| c.shap).sum();
    Ok(ExplainReport {
        smiles: smiles.to_string(),
        base_value: expl.base_value,
        prediction: expl.prediction,
        other: total - shown,
        additivity_error: expl.additivity_error(),
        top,
        decision: decision_data(&expl, top_k),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceRow {
    pub feature: String,
    pub mean_abs_shap: f64,
}

/// Mean |SHAP| over every row of `ds`, top `k` features.
pub fn importance(bundle: &ModelBundle, ds: &Dataset, top_k: usize) -> Result<Vec<ImportanceRow>> {
    let fs = bundle.features(ds)?;
    let mut imp = mean_abs_shap(&bundle.mixture, &fs.x)?;
    imp.truncate(top_k);
    Ok(imp.into_iter().map(|i| ImportanceRow { feature: i.feature, mean_abs_shap: i.mean_abs_shap }).collect())
}
