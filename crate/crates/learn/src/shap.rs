//! Path-dependent TreeSHAP with node sample counts as cover.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ensemble::{Combination, TreeEnsemble};
use crate::error::{LearnError, Result};
use crate::mixture::MixtureModel;
use crate::tree::RegressionTree;

fn check_cover(tree: &RegressionTree) -> Result<()> {
    for (i, n) in tree.nodes.iter().enumerate() {
        if !(n.samples.is_finite() && n.samples > 0.0) {
            return Err(LearnError::MissingCover(i));
        }
    }
    Ok(())
}

/// Cover-weighted mean of the leaf values.
pub fn expected_value(tree: &RegressionTree) -> Result<f64> {
    check_cover(tree)?;
    fn go(t: &RegressionTree, i: usize) -> f64 {
        let n = &t.nodes[i];
        match &n.split {
            None => n.value,
            Some(s) => {
                let (cl, cr) = (t.nodes[s.left].samples, t.nodes[s.right].samples);
                (cl * go(t, s.left) + cr * go(t, s.right)) / (cl + cr)
            }
        }
    }
    Ok(go(tree, 0))
}

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: usize,
    zero: f64,
    one: f64,
    weight: f64,
}

const NO_FEATURE: usize = usize::MAX;

fn extend(path: &mut [PathElement], depth: usize, zero: f64, one: f64, feature: usize) {
    path[depth] = PathElement { feature, zero, one, weight: if depth == 0 { 1.0 } else { 0.0 } };
    let d1 = (depth + 1) as f64;
    for i in (0..depth).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / d1;
        path[i].weight = zero * path[i].weight * (depth - i) as f64 / d1;
    }
}

fn unwind(path: &mut [PathElement], depth: usize, index: usize) {
    let PathElement { one, zero, .. } = path[index];
    let d1 = (depth + 1) as f64;
    let mut next = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next * d1 / ((i + 1) as f64 * one);
            next = tmp - path[i].weight * zero * (depth - i) as f64 / d1;
        } else {
            path[i].weight = path[i].weight * d1 / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
}

fn unwound_sum(path: &[PathElement], depth: usize, index: usize) -> f64 {
    let PathElement { one, zero, .. } = path[index];
    let d1 = (depth + 1) as f64;
    let mut next = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next * d1 / ((i + 1) as f64 * one);
            total += tmp;
            next = path[i].weight - tmp * zero * (depth - i) as f64 / d1;
        } else if zero != 0.0 {
            total += path[i].weight / zero / ((depth - i) as f64 / d1);
        }
    }
    total
}

struct Walk<'a> {
    tree: &'a RegressionTree,
    x: &'a dyn Fn(usize) -> f64,
    phi: &'a mut [f64],
}

impl Walk<'_> {
    fn recurse(&mut self, node: usize, parent: &[PathElement], depth: usize, zero: f64, one: f64, feature: usize) {
        let mut path = Vec::with_capacity(depth + 2);
        path.extend_from_slice(&parent[..depth]);
        path.push(PathElement { feature: NO_FEATURE, zero: 0.0, one: 0.0, weight: 0.0 });
        extend(&mut path, depth, zero, one, feature);
        let n = &self.tree.nodes[node];
        match &n.split {
            None => {
                for i in 1..=depth {
                    let w = unwound_sum(&path, depth, i);
                    let el = path[i];
                    self.phi[el.feature] += w * (el.one - el.zero) * n.value;
                }
            }
            Some(s) => {
                let (hot, cold) = if (self.x)(s.feature) <= s.threshold { (s.left, s.right) } else { (s.right, s.left) };
                let cover = n.samples;
                let hot_zero = self.tree.nodes[hot].samples / cover;
                let cold_zero = self.tree.nodes[cold].samples / cover;
                let (mut in_zero, mut in_one) = (1.0, 1.0);
                let mut depth = depth;
                if let Some(k) = (1..=depth).find(|&k| path[k].feature == s.feature) {
                    in_zero = path[k].zero;
                    in_one = path[k].one;
                    unwind(&mut path, depth, k);
                    depth -= 1;
                }
                self.recurse(hot, &path, depth + 1, hot_zero * in_zero, in_one, s.feature);
                self.recurse(cold, &path, depth + 1, cold_zero * in_zero, 0.0, s.feature);
            }
        }
    }
}

/// Add `scale` times the SHAP values of `tree` at `x` into `phi`.
fn accumulate(tree: &RegressionTree, x: &dyn Fn(usize) -> f64, scale: f64, phi: &mut [f64]) -> Result<()> {
    check_cover(tree)?;
    let mut local = vec![0.0; phi.len()];
    let mut walk = Walk { tree, x, phi: &mut local };
    walk.recurse(0, &[], 0, 1.0, 1.0, NO_FEATURE);
    for (p, l) in phi.iter_mut().zip(&local) {
        *p += scale * l;
    }
    Ok(())
}

/// SHAP values of one tree; they sum to `tree(x) - expected_value(tree)`.
pub fn shap_tree(tree: &RegressionTree, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != tree.n_features {
        return Err(LearnError::DimensionMismatch { expected: tree.n_features, got: x.len() });
    }
    let mut phi = vec![0.0; tree.n_features];
    accumulate(tree, &|f| x[f], 1.0, &mut phi)?;
    Ok(phi)
}

/// `(base value, contributions)` for a tree ensemble.
pub fn shap_trees(model: &TreeEnsemble, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    if x.len() != model.n_features {
        return Err(LearnError::DimensionMismatch { expected: model.n_features, got: x.len() });
    }
    let w = model.tree_weight();
    let mut phi = vec![0.0; model.n_features];
    let mut base = match model.combination {
        Combination::Average => 0.0,
        Combination::Boosting { .. } => model.base_score,
    };
    for t in &model.trees {
        accumulate(t, &|f| x[f], w, &mut phi)?;
        base += w * expected_value(t)?;
    }
    Ok((base, phi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub feature: String,
    pub value: f64,
    pub shap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub base_value: f64,
    pub prediction: f64,
    /// One entry per feature, in layout order.
    pub contributions: Vec<Contribution>,
}

impl Explanation {
    /// `|base + Σ shap - prediction|`.
    pub fn additivity_error(&self) -> f64 {
        (self.base_value + self.contributions.iter().map(|c| c.shap).sum::<f64>() - self.prediction).abs()
    }

    /// Contributions sorted by descending `|shap|`, ties by layout order.
    pub fn top(&self, k: usize) -> Vec<&Contribution> {
        let mut v: Vec<&Contribution> = self.contributions.iter().collect();
        v.sort_by(|a, b| b.shap.abs().total_cmp(&a.shap.abs()));
        v.truncate(k);
        v
    }
}

pub fn explain_trees(model: &TreeEnsemble, names: &[String], x: &[f64]) -> Result<Explanation> {
    if names.len() != model.n_features {
        return Err(LearnError::DimensionMismatch { expected: model.n_features, got: names.len() });
    }
    let (base_value, phi) = shap_trees(model, x)?;
    Ok(Explanation {
        base_value,
        prediction: model.predict_row(x),
        contributions: names
            .iter()
            .zip(x)
            .zip(phi)
            .map(|((n, &v), s)| Contribution { feature: n.clone(), value: v, shap: s })
            .collect(),
    })
}

/// Mixture attribution: the meta and voting layers are linear, so the base
/// SHAP vectors combine with the same weights as the base predictions.
pub fn mixture_shap(model: &MixtureModel, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    if x.len() != model.n_features() {
        return Err(LearnError::DimensionMismatch { expected: model.n_features(), got: x.len() });
    }
    let z = model.normalization.apply_row(x);
    let [v_stack, v_best] = model.voting_weights;
    let mut base = v_stack * model.meta_model.intercept;
    let mut phi = vec![0.0; x.len()];
    for (m, named) in model.base_models.iter().enumerate() {
        let mut weight = v_stack * model.meta_model.weights[m];
        if m == model.best_base {
            weight += v_best;
        }
        if weight == 0.0 {
            continue;
        }
        let (b, p) = shap_trees(&named.model, &z)?;
        base += weight * b;
        for (acc, v) in phi.iter_mut().zip(p) {
            *acc += weight * v;
        }
    }
    Ok((base, phi))
}

pub fn explain_mixture(model: &MixtureModel, x: &[f64]) -> Result<Explanation> {
    let (base_value, phi) = mixture_shap(model, x)?;
    Ok(Explanation {
        base_value,
        prediction: model.predict_row(x)?,
        contributions: model
            .feature_layout
            .iter()
            .zip(x)
            .zip(phi)
            .map(|((n, &v), s)| Contribution { feature: n.clone(), value: v, shap: s })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub feature: String,
    pub index: usize,
    pub mean_abs_shap: f64,
}

/// Mean |SHAP| per feature over the background rows, sorted descending (ties by index).
pub fn mean_abs_shap(model: &MixtureModel, background: &DMatrix<f64>) -> Result<Vec<Importance>> {
    if background.nrows() == 0 {
        return Err(LearnError::EmptyDataset);
    }
    let p = model.n_features();
    let mut acc = vec![0.0; p];
    for i in 0..background.nrows() {
        let row: Vec<f64> = background.row(i).iter().copied().collect();
        let (_, phi) = mixture_shap(model, &row)?;
        for (a, v) in acc.iter_mut().zip(phi) {
            *a += v.abs();
        }
    }
    let n = background.nrows() as f64;
    let mut out: Vec<Importance> = acc
        .into_iter()
        .enumerate()
        .map(|(j, s)| Importance { feature: model.feature_layout[j].clone(), index: j, mean_abs_shap: s / n })
        .collect();
    out.sort_by(|a, b| b.mean_abs_shap.total_cmp(&a.mean_abs_shap).then(a.index.cmp(&b.index)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub label: String,
    pub shap: f64,
    pub cumulative: f64,
}

pub const OTHER_LABEL: &str = "other";

/// Decision-plot path: an `other` record carrying the base value plus every
/// contribution outside the top `k`, then the top `k` non-zero features in
/// ascending `|shap|`. The last cumulative value is the prediction up to rounding.
pub fn decision_data(expl: &Explanation, top_k: usize) -> Vec<DecisionRecord> {
    let mut ranked: Vec<&Contribution> = expl.contributions.iter().filter(|c| c.shap != 0.0).collect();
    ranked.sort_by(|a, b| b.shap.abs().total_cmp(&a.shap.abs()));
    let split = top_k.min(ranked.len());
    let rest: f64 = ranked[split..].iter().map(|c| c.shap).sum();
    let mut cumulative = expl.base_value + rest;
    let mut out = vec![DecisionRecord { label: OTHER_LABEL.into(), shap: rest, cumulative }];
    for c in ranked[..split].iter().rev() {
        cumulative += c.shap;
        out.push(DecisionRecord { label: c.feature.clone(), shap: c.shap, cumulative });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{Node, Split};

    fn stump(a: f64, b: f64, cl: f64, cr: f64) -> RegressionTree {
        RegressionTree {
            nodes: vec![
                Node { value: 0.0, samples: cl + cr, split: Some(Split { feature: 1, threshold: 0.5, left: 1, right: 2 }) },
                Node { value: a, samples: cl, split: None },
                Node { value: b, samples: cr, split: None },
            ],
            n_features: 3,
            max_depth: 1,
            min_samples_leaf: 1.0,
        }
    }

    #[test]
    fn single_leaf() {
        let t = RegressionTree::leaf(4.0, 10.0, 2);
        assert_eq!(shap_tree(&t, &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(expected_value(&t).unwrap(), 4.0);
    }

    #[test]
    fn equal_cover_stump() {
        let t = stump(10.0, 4.0, 5.0, 5.0);
        let phi = shap_tree(&t, &[9.0, 0.0, 9.0]).unwrap();
        assert_eq!(phi, vec![0.0, 3.0, 0.0]);
        assert_eq!(expected_value(&t).unwrap(), 7.0);
    }

    #[test]
    fn repeated_feature_path() {
        // the same feature twice on one path still telescopes to the prediction
        let t = RegressionTree {
            nodes: vec![
                Node { value: 0.0, samples: 10.0, split: Some(Split { feature: 0, threshold: 0.5, left: 1, right: 4 }) },
                Node { value: 0.0, samples: 6.0, split: Some(Split { feature: 0, threshold: 0.2, left: 2, right: 3 }) },
                Node { value: 1.0, samples: 2.0, split: None },
                Node { value: 3.0, samples: 4.0, split: None },
                Node { value: -2.0, samples: 4.0, split: None },
            ],
            n_features: 1,
            max_depth: 2,
            min_samples_leaf: 1.0,
        };
        let phi = shap_tree(&t, &[0.1]).unwrap();
        let ev = expected_value(&t).unwrap();
        assert!((ev + phi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_cover() {
        let t = stump(1.0, 2.0, 0.0, 3.0);
        assert!(matches!(shap_tree(&t, &[0.0; 3]), Err(LearnError::MissingCover(1))));
    }

    fn expl(shaps: &[f64]) -> Explanation {
        Explanation {
            base_value: 2090.0,
            prediction: 2090.0 + shaps.iter().sum::<f64>(),
            contributions: shaps
                .iter()
                .enumerate()
                .map(|(i, &s)| Contribution { feature: format!("f{i}"), value: 0.0, shap: s })
                .collect(),
        }
    }

    #[test]
    fn decision_records() {
        let zero = decision_data(&expl(&[0.0, 0.0]), 5);
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].cumulative, 2090.0);

        let e = expl(&[1.0, -4.0, 0.5, 2.0]);
        let one = decision_data(&e, 1);
        assert_eq!(one.len(), 2);
        assert_eq!(one[0].label, OTHER_LABEL);
        assert_eq!(one[1].label, "f1");
        assert!((one[1].cumulative - e.prediction).abs() < 1e-12);

        let all = decision_data(&e, 10);
        let labels: Vec<&str> = all.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["other", "f2", "f0", "f3", "f1"]);
        assert_eq!(all[0].cumulative, 2090.0);
        assert!((all.last().unwrap().cumulative - e.prediction).abs() < 1e-12);
    }
}
