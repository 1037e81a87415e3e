//! Cross-validation, similarity grouping, noise sweep and learning curve.

use diazoir::tanimoto;
use diazoir_learn::{assign_folds, derive_seed, fit_mixture, DMatrix, MixtureModel, MixtureParams};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::NoiseTarget;
use crate::error::{HarnessError, Result};
use crate::features::FeatureSet;
use crate::metrics::{metrics, EvalReport};
use crate::pipeline::BaseScore;

const CV_STREAM: u64 = 0xc055;
const NOISE_STREAM: u64 = 0x401e;
const CURVE_STREAM: u64 = 0xc0e5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub k_folds: usize,
    pub n: usize,
    pub mixture: EvalReport,
    pub bases: Vec<BaseScore>,
    /// Out-of-fold mixture prediction per row.
    pub predictions: Vec<f64>,
}

impl CvReport {
    pub fn best_base(&self) -> Option<&BaseScore> {
        self.bases.iter().max_by(|a, b| a.report.r2.unwrap_or(f64::MIN).total_cmp(&b.report.r2.unwrap_or(f64::MIN)))
    }
}

/// K-fold cross-validation of the whole mixture. Each outer training part is
/// fitted with its own inner folds; base learners are scored from the same fits.
pub fn cross_validate(fs: &FeatureSet, params: &MixtureParams, k: usize, seed: u64) -> Result<CvReport> {
    if k < 2 {
        return Err(HarnessError::Invalid(format!("k must be >= 2, got {k}")));
    }
    let n = fs.len();
    if n < 2 * k {
        return Err(HarnessError::TooFewRows { need: 2 * k, got: n });
    }
    let fold_of = assign_folds(n, k, derive_seed(seed, CV_STREAM));
    let n_base = params.base_learners.len();
    let mut mix = vec![0.0; n];
    let mut base = vec![vec![0.0; n]; n_base];
    for fold in 0..k {
        let (held, kept): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] == fold);
        let tr = fs.subset(&kept);
        let te = fs.subset(&held);
        let p = MixtureParams { seed: derive_seed(params.seed, fold as u64), ..params.clone() };
        let model = fit_mixture(&tr.x, &tr.y, fs.layout.clone(), &p)?.model;
        for (&i, parts) in held.iter().zip(model.parts(&te.x)?) {
            mix[i] = parts.prediction;
            for m in 0..n_base {
                base[m][i] = parts.base[m];
            }
        }
    }
    let bases = params
        .base_learners
        .iter()
        .zip(&base)
        .map(|(b, p)| Ok(BaseScore { name: b.name.clone(), report: metrics(&fs.y, p)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(CvReport { k_folds: k, n, mixture: metrics(&fs.y, &mix)?, bases, predictions: mix })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityRow {
    pub id: String,
    pub max_similarity: f64,
    pub nearest_train_id: String,
    pub wavenumber_cm1: f64,
    pub prediction: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityGroup {
    /// Rows with max similarity ≥ this value; for the complement, rows below it.
    pub threshold: f64,
    pub complement: bool,
    pub n: usize,
    pub empty: bool,
    /// `None` when the group is empty.
    pub metrics: Option<EvalReport>,
    /// Indices into `rows`.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub overall: EvalReport,
    pub groups: Vec<SimilarityGroup>,
    pub rows: Vec<SimilarityRow>,
}

impl SimilarityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,group,n,r2,rmse,mae\n");
        for g in &self.groups {
            let kind = if g.complement { "below" } else { "at_or_above" };
            let (r2, rmse, mae) = match &g.metrics {
                Some(m) => (m.r2.map_or("nan".into(), |v| v.to_string()), m.rmse.to_string(), m.mae.to_string()),
                None => ("nan".into(), "nan".into(), "nan".into()),
            };
            s.push_str(&format!("{},{kind},{},{r2},{rmse},{mae}\n", g.threshold, g.n));
        }
        s
    }
}

fn group(threshold: f64, complement: bool, members: Vec<usize>, y: &[f64], p: &[f64]) -> Result<SimilarityGroup> {
    let yt: Vec<f64> = members.iter().map(|&i| y[i]).collect();
    let yp: Vec<f64> = members.iter().map(|&i| p[i]).collect();
    Ok(SimilarityGroup {
        threshold,
        complement,
        n: members.len(),
        empty: members.is_empty(),
        metrics: if members.is_empty() { None } else { Some(metrics(&yt, &yp)?) },
        members,
    })
}

/// Group test rows by their highest Tanimoto similarity to any training row.
pub fn similarity_experiment(
    model: &MixtureModel,
    train: &FeatureSet,
    test: &FeatureSet,
    thresholds: &[f64],
) -> Result<SimilarityReport> {
    if train.is_empty() || test.is_empty() {
        return Err(HarnessError::TooFewRows { need: 1, got: 0 });
    }
    let pred = model.predict(&test.x)?;
    let mut rows = Vec::with_capacity(test.len());
    for (i, fp) in test.fingerprints.iter().enumerate() {
        let mut best = (f64::NEG_INFINITY, 0);
        for (j, other) in train.fingerprints.iter().enumerate() {
            let s = tanimoto(fp, other).map_err(|e| HarnessError::Invalid(e.to_string()))?;
            if s > best.0 {
                best = (s, j);
            }
        }
        rows.push(SimilarityRow {
            id: test.ids[i].clone(),
            max_similarity: best.0,
            nearest_train_id: train.ids[best.1].clone(),
            wavenumber_cm1: test.y[i],
            prediction: pred[i],
            abs_error: (test.y[i] - pred[i]).abs(),
        });
    }
    let mut groups = Vec::with_capacity(thresholds.len() + 1);
    for &t in thresholds {
        let members = (0..rows.len()).filter(|&i| rows[i].max_similarity >= t).collect();
        groups.push(group(t, false, members, &test.y, &pred)?);
    }
    if let Some(lowest) = thresholds.iter().copied().reduce(f64::min) {
        let members = (0..rows.len()).filter(|&i| rows[i].max_similarity < lowest).collect();
        groups.push(group(lowest, true, members, &test.y, &pred)?);
    }
    Ok(SimilarityReport { overall: metrics(&test.y, &pred)?, groups, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseLevel {
    pub level: f64,
    pub r2: Vec<Option<f64>>,
    pub r2_mean: Option<f64>,
    pub r2_std: Option<f64>,
    pub rmse_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseReport {
    pub target: NoiseTarget,
    pub repeats: usize,
    pub levels: Vec<NoiseLevel>,
}

impl NoiseReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,r2_mean,r2_std,rmse_mean\n");
        let opt = |v: Option<f64>| v.map_or("nan".into(), |v| v.to_string());
        for l in &self.levels {
            s.push_str(&format!("{},{},{},{}\n", l.level, opt(l.r2_mean), opt(l.r2_std), l.rmse_mean));
        }
        s
    }
}

fn column_std(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| {
            let c = x.column(j);
            let m = c.sum() / n;
            (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt()
        })
        .collect()
}

fn perturb(x: &DMatrix<f64>, sd: &[f64], level: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut out = x.clone();
    for j in 0..x.ncols() {
        if sd[j] == 0.0 {
            continue;
        }
        for i in 0..x.nrows() {
            let z: f64 = StandardNormal.sample(rng);
            out[(i, j)] += level * sd[j] * z;
        }
    }
    out
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

/// Gaussian noise with σ = level × (training std) added to the features of
/// both sets, to the training labels, or to both; refit and score per repeat.
/// Every fit uses `params.seed`, so level 0 reproduces the baseline fit.
pub fn noise_experiment(
    train: &FeatureSet,
    test: &FeatureSet,
    params: &MixtureParams,
    levels: &[f64],
    repeats: usize,
    target: NoiseTarget,
    seed: u64,
) -> Result<NoiseReport> {
    if repeats == 0 {
        return Err(HarnessError::Invalid("repeats must be >= 1".into()));
    }
    let x_sd = column_std(&train.x);
    let (_, y_sd) = mean_std(&train.y);
    let features = matches!(target, NoiseTarget::Features | NoiseTarget::Both);
    let labels = matches!(target, NoiseTarget::Labels | NoiseTarget::Both);
    let run = |xtr: &DMatrix<f64>, ytr: &[f64], xte: &DMatrix<f64>| -> Result<EvalReport> {
        let model = fit_mixture(xtr, ytr, train.layout.clone(), params)?.model;
        metrics(&test.y, &model.predict(xte)?)
    };
    let mut out = Vec::with_capacity(levels.len());
    let mut clean: Option<EvalReport> = None;
    for (li, &level) in levels.iter().enumerate() {
        let mut reports = Vec::with_capacity(repeats);
        if level == 0.0 {
            if clean.is_none() {
                clean = Some(run(&train.x, &train.y, &test.x)?);
            }
            reports = vec![clean.clone().expect("set above"); repeats];
        } else {
            for r in 0..repeats {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(seed, NOISE_STREAM + li as u64), r as u64));
                let (xtr, xte) = if features {
                    (perturb(&train.x, &x_sd, level, &mut rng), perturb(&test.x, &x_sd, level, &mut rng))
                } else {
                    (train.x.clone(), test.x.clone())
                };
                let ytr: Vec<f64> = if labels {
                    train
                        .y
                        .iter()
                        .map(|&v| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            v + level * y_sd * z
                        })
                        .collect()
                } else {
                    train.y.clone()
                };
                reports.push(run(&xtr, &ytr, &xte)?);
            }
        }
        let r2: Vec<Option<f64>> = reports.iter().map(|r| r.r2).collect();
        let defined: Option<Vec<f64>> = r2.iter().copied().collect();
        let stats = defined.map(|v| mean_std(&v));
        out.push(NoiseLevel {
            level,
            r2,
            r2_mean: stats.map(|s| s.0),
            r2_std: stats.map(|s| s.1),
            rmse_mean: reports.iter().map(|r| r.rmse).sum::<f64>() / repeats as f64,
        });
    }
    Ok(NoiseReport { target, repeats, levels: out })
}

/// Nested training subsets: a seeded shuffle of `0..n`, prefix of
/// `round(f * n)` rows per fraction, each returned in ascending order.
pub fn curve_subsets(n: usize, fractions: &[f64], seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, CURVE_STREAM)));
    fractions
        .iter()
        .map(|&f| {
            let m = ((f * n as f64).round() as usize).min(n);
            let mut s = order[..m].to_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub n_train: usize,
    pub test: EvalReport,
    /// Present when cross-validation was requested.
    pub cv: Option<EvalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveReport {
    pub n_test: usize,
    pub points: Vec<CurvePoint>,
}

impl CurveReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("fraction,n_train,test_r2,test_rmse,cv_r2\n");
        let opt = |v: Option<f64>| v.map_or("nan".into(), |v| v.to_string());
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                p.fraction,
                p.n_train,
                opt(p.test.r2),
                p.test.rmse,
                opt(p.cv.as_ref().and_then(|c| c.r2))
            ));
        }
        s
    }
}

/// Fit on growing nested subsets of `train`, always scoring on the same `test`.
pub fn learning_curve(
    train: &FeatureSet,
    test: &FeatureSet,
    params: &MixtureParams,
    fractions: &[f64],
    cv_folds: Option<usize>,
    seed: u64,
) -> Result<CurveReport> {
    let mut points = Vec::with_capacity(fractions.len());
    for (&fraction, rows) in fractions.iter().zip(curve_subsets(train.len(), fractions, seed)) {
        if rows.len() < params.k_folds {
            return Err(HarnessError::TooFewRows { need: params.k_folds, got: rows.len() });
        }
        let part = train.subset(&rows);
        let model = fit_mixture(&part.x, &part.y, train.layout.clone(), params)?.model;
        let cv = match cv_folds {
            Some(k) => Some(cross_validate(&part, params, k, seed)?.mixture),
            None => None,
        };
        points.push(CurvePoint { fraction, n_train: rows.len(), test: metrics(&test.y, &model.predict(&test.x)?)?, cv });
    }
    Ok(CurveReport { n_test: test.len(), points })
}
