//! Run configuration: a TOML file layered over a named preset.

use std::path::{Path, PathBuf};

use diazoir::fingerprint::fnv1a;
use diazoir::{ComboTable, Featurizer};
use diazoir_learn::{
    BaseLearner, ForestParams, GbmParams, Growth, HistGbmParams, LearnerSpec, MixtureParams, Order,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const LEARNER_NAMES: [&str; 4] = ["random_forest", "gbm", "gbm_newton", "hist_gbm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub preset: String,
    pub seed: u64,
    pub fingerprint: FingerprintConfig,
    pub samd: SamdConfig,
    pub split: SplitConfig,
    pub ensemble: EnsembleConfig,
    pub learners: LearnersConfig,
    pub experiments: ExperimentsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerprintConfig {
    pub radius: u32,
    pub nbits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamdConfig {
    /// `default`, `extended`, or a path to a table file.
    pub combo_table: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub k_folds: usize,
    /// Weights on the stacked meta-model and on the best single base model.
    pub voting_weights: [f64; 2],
    pub base_models: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnersConfig {
    pub random_forest: ForestParams,
    pub gbm: GbmParams,
    pub gbm_newton: GbmParams,
    pub hist_gbm: HistGbmParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTarget {
    Features,
    Labels,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentsConfig {
    pub thresholds: Vec<f64>,
    pub noise_levels: Vec<f64>,
    pub noise_repeats: usize,
    pub noise_target: NoiseTarget,
    pub fractions: Vec<f64>,
    /// Also run a full cross-validation at every learning-curve fraction.
    pub curve_cv: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config::preset("default").expect("default preset")
    }
}

impl Config {
    /// `default` carries the full-size learner settings; `benchmark` is a
    /// lighter set sized for desk-scale runs.
    pub fn preset(name: &str) -> Result<Config> {
        let full = Config {
            preset: "default".into(),
            seed: 42,
            fingerprint: FingerprintConfig { radius: 2, nbits: 2048 },
            samd: SamdConfig { combo_table: "default".into() },
            split: SplitConfig { test_fraction: 0.2 },
            ensemble: EnsembleConfig {
                k_folds: 5,
                voting_weights: [0.5, 0.5],
                base_models: LEARNER_NAMES.iter().map(|s| s.to_string()).collect(),
            },
            learners: LearnersConfig {
                random_forest: ForestParams::default(),
                gbm: GbmParams::default(),
                gbm_newton: GbmParams { order: Order::Second, ..GbmParams::default() },
                hist_gbm: HistGbmParams::default(),
            },
            experiments: ExperimentsConfig {
                thresholds: vec![0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6, 0.5],
                noise_levels: (0..=10).map(|i| i as f64 / 10.0).collect(),
                noise_repeats: 5,
                noise_target: NoiseTarget::Features,
                fractions: vec![0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95, 1.0],
                curve_cv: false,
            },
        };
        match name {
            "default" => Ok(full),
            "benchmark" => Ok(Config {
                preset: "benchmark".into(),
                learners: LearnersConfig {
                    random_forest: ForestParams { n_trees: 30, max_depth: 10, feature_fraction: 0.15, ..ForestParams::default() },
                    gbm: GbmParams {
                        n_rounds: 100,
                        learning_rate: 0.15,
                        max_depth: 4,
                        feature_fraction: 0.2,
                        ..GbmParams::default()
                    },
                    gbm_newton: GbmParams {
                        n_rounds: 100,
                        learning_rate: 0.15,
                        max_depth: 4,
                        feature_fraction: 0.2,
                        order: Order::Second,
                        ..GbmParams::default()
                    },
                    hist_gbm: HistGbmParams {
                        n_rounds: 100,
                        learning_rate: 0.15,
                        max_leaves: 15,
                        n_bins: 32,
                        min_samples_leaf: 5.0,
                        feature_fraction: 0.3,
                        growth: Growth::LeafWise,
                        ..HistGbmParams::default()
                    },
                },
                ..full
            }),
            other => Err(HarnessError::Config(format!("unknown preset `{other}` (expected default or benchmark)"))),
        }
    }

    /// Parse TOML text. A top-level `preset` key picks the base layer; every
    /// other key overrides it.
    pub fn from_toml_str(text: &str) -> Result<Config> {
        let user: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let name = match user.get("preset") {
            None => "default",
            Some(toml::Value::String(s)) => s.as_str(),
            Some(_) => return Err(HarnessError::Config("preset must be a string".into())),
        };
        let base = Config::preset(name)?;
        let mut merged = match toml::Value::try_from(&base) {
            Ok(toml::Value::Table(t)) => t,
            Ok(_) => unreachable!("config serialises to a table"),
            Err(e) => return Err(HarnessError::Config(e.to_string())),
        };
        merge(&mut merged, user);
        let cfg: Config = toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Config::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        let fp = &self.fingerprint;
        if fp.radius > 8 {
            return bad(format!("fingerprint.radius must be in 0..=8, got {}", fp.radius));
        }
        if !(16..=65536).contains(&fp.nbits) {
            return bad(format!("fingerprint.nbits must be in 16..=65536, got {}", fp.nbits));
        }
        let tf = self.split.test_fraction;
        if !(tf > 0.0 && tf < 1.0) {
            return bad(format!("split.test_fraction must be in (0, 1), got {tf}"));
        }
        let ens = &self.ensemble;
        if !(2..=20).contains(&ens.k_folds) {
            return bad(format!("ensemble.k_folds must be in 2..=20, got {}", ens.k_folds));
        }
        if ens.base_models.is_empty() {
            return bad("ensemble.base_models is empty".into());
        }
        for (i, name) in ens.base_models.iter().enumerate() {
            if !LEARNER_NAMES.contains(&name.as_str()) {
                return bad(format!("unknown base model `{name}` (expected one of {})", LEARNER_NAMES.join(", ")));
            }
            if ens.base_models[..i].contains(name) {
                return bad(format!("base model `{name}` listed twice"));
            }
        }
        self.mixture_params().validate().map_err(|e| HarnessError::Config(e.to_string()))?;

        let ex = &self.experiments;
        check_sequence("experiments.thresholds", &ex.thresholds, 0.0, 1.0, false, true)?;
        check_sequence("experiments.noise_levels", &ex.noise_levels, 0.0, 10.0, true, true)?;
        check_sequence("experiments.fractions", &ex.fractions, 0.0, 1.0, true, false)?;
        if ex.fractions[0] <= 0.0 {
            return bad("experiments.fractions must be > 0".into());
        }
        if !(1..=100).contains(&ex.noise_repeats) {
            return bad(format!("experiments.noise_repeats must be in 1..=100, got {}", ex.noise_repeats));
        }
        if let Err(e) = self.featurizer() {
            return bad(e.to_string());
        }
        Ok(())
    }

    /// 16 hex digits of FNV-1a over the compact JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        format!("{:016x}", fnv1a(json.as_bytes()))
    }

    pub fn combo_table(&self) -> Result<ComboTable> {
        match self.samd.combo_table.as_str() {
            "default" => Ok(ComboTable::default_table()),
            "extended" => Ok(ComboTable::extended_table()),
            path => Ok(ComboTable::load(&PathBuf::from(path))?),
        }
    }

    pub fn featurizer(&self) -> Result<Featurizer> {
        Ok(Featurizer::new(self.combo_table()?, self.fingerprint.radius, self.fingerprint.nbits)?)
    }

    pub fn learner(&self, name: &str) -> Option<LearnerSpec> {
        let l = &self.learners;
        match name {
            "random_forest" => Some(LearnerSpec::RandomForest(l.random_forest.clone())),
            "gbm" => Some(LearnerSpec::Gbm(l.gbm.clone())),
            "gbm_newton" => Some(LearnerSpec::Gbm(l.gbm_newton.clone())),
            "hist_gbm" => Some(LearnerSpec::HistGbm(l.hist_gbm.clone())),
            _ => None,
        }
    }

    pub fn mixture_params(&self) -> MixtureParams {
        MixtureParams {
            k_folds: self.ensemble.k_folds,
            seed: self.seed,
            voting_weights: self.ensemble.voting_weights,
            base_learners: self
                .ensemble
                .base_models
                .iter()
                .filter_map(|n| self.learner(n).map(|spec| BaseLearner { name: n.clone(), spec }))
                .collect(),
        }
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn check_sequence(name: &str, v: &[f64], lo: f64, hi: f64, increasing: bool, allow_lo: bool) -> Result<()> {
    if v.is_empty() {
        return Err(HarnessError::Config(format!("{name} is empty")));
    }
    for (i, &x) in v.iter().enumerate() {
        let above = if allow_lo { x >= lo } else { x > lo };
        if !(above && x <= hi) {
            return Err(HarnessError::Config(format!("{name}[{i}] = {x} is outside [{lo}, {hi}]")));
        }
        if i > 0 && (increasing && x <= v[i - 1] || !increasing && x >= v[i - 1]) {
            let dir = if increasing { "increasing" } else { "decreasing" };
            return Err(HarnessError::Config(format!("{name} must be strictly {dir}")));
        }
    }
    Ok(())
}
