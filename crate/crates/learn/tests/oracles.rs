use diazoir_learn::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Least squares with intercept via the normal equations.
fn ols(x: &DMatrix<f64>, y: &[f64]) -> (Vec<f64>, f64) {
    let n = x.nrows();
    let p = x.ncols();
    let a = DMatrix::from_fn(n, p + 1, |i, j| if j == p { 1.0 } else { x[(i, j)] });
    let b = DVector::from_column_slice(y);
    let sol = (a.transpose() * &a).lu().solve(&(a.transpose() * b)).unwrap();
    (sol.rows(0, p).iter().copied().collect(), sol[p])
}

#[test]
fn bayesian_ridge_matches_least_squares() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = 1 + seed as usize;
        let x = DMatrix::from_fn(60, p, |_, _| rng.random_range(-3.0..3.0));
        let truth: Vec<f64> = (0..p).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y: Vec<f64> = (0..60).map(|i| 11.0 + (0..p).map(|j| truth[j] * x[(i, j)]).sum::<f64>()).collect();
        let m = fit_bayesian_ridge(&x, &y).unwrap();
        let (w, b) = ols(&x, &y);
        for j in 0..p {
            let rel = (m.weights[j] - w[j]).abs() / w[j].abs();
            assert!(rel < 1e-6, "seed {seed} weight {j}: {} vs {} ({rel:e})", m.weights[j], w[j]);
        }
        assert!((m.intercept - b).abs() / b.abs() < 1e-6);
    }
}

/// Path-dependent conditional expectation with the features in `mask` fixed to `x`.
fn cond_expectation(t: &RegressionTree, x: &[f64], mask: u32, node: usize) -> f64 {
    let n = &t.nodes[node];
    match &n.split {
        None => n.value,
        Some(s) => {
            if mask >> s.feature & 1 == 1 {
                let next = if x[s.feature] <= s.threshold { s.left } else { s.right };
                cond_expectation(t, x, mask, next)
            } else {
                let (cl, cr) = (t.nodes[s.left].samples, t.nodes[s.right].samples);
                (cl * cond_expectation(t, x, mask, s.left) + cr * cond_expectation(t, x, mask, s.right)) / (cl + cr)
            }
        }
    }
}

fn brute_force(t: &RegressionTree, x: &[f64]) -> Vec<f64> {
    let m = t.n_features;
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    (0..m)
        .map(|i| {
            let mut phi = 0.0;
            for s in 0u32..(1 << m) {
                if s >> i & 1 == 1 {
                    continue;
                }
                let k = s.count_ones() as usize;
                let w = fact(k) * fact(m - k - 1) / fact(m);
                phi += w * (cond_expectation(t, x, s | 1 << i, 0) - cond_expectation(t, x, s, 0));
            }
            phi
        })
        .collect()
}

fn random_tree(rng: &mut ChaCha8Rng, n_features: usize, max_depth: usize) -> RegressionTree {
    fn build(rng: &mut ChaCha8Rng, nodes: &mut Vec<Node>, depth: usize, max_depth: usize, nf: usize, cover: f64) -> usize {
        let id = nodes.len();
        nodes.push(Node { value: rng.random_range(-10.0..10.0), samples: cover, split: None });
        if depth < max_depth && cover >= 2.0 && rng.random_bool(0.75) {
            let left_cover = rng.random_range(1.0..cover);
            let feature = rng.random_range(0..nf);
            let threshold = rng.random_range(0.0..1.0);
            let left = build(rng, nodes, depth + 1, max_depth, nf, left_cover);
            let right = build(rng, nodes, depth + 1, max_depth, nf, cover - left_cover);
            nodes[id].split = Some(Split { feature, threshold, left, right });
        }
        id
    }
    let mut nodes = Vec::new();
    let cover = rng.random_range(5.0..500.0);
    build(rng, &mut nodes, 0, max_depth, n_features, cover);
    RegressionTree { nodes, n_features, max_depth, min_samples_leaf: 1.0 }
}

#[test]
fn treeshap_equals_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let nf = rng.random_range(1..=6);
        let depth = rng.random_range(1..=4);
        let t = random_tree(&mut rng, nf, depth);
        t.validate().unwrap();
        let x: Vec<f64> = (0..nf).map(|_| rng.random::<f64>()).collect();
        let fast = shap_tree(&t, &x).unwrap();
        let slow = brute_force(&t, &x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-8, "{fast:?} vs {slow:?}");
        }
        let total = expected_value(&t).unwrap() + fast.iter().sum::<f64>();
        assert!((total - t.predict_row(&x)).abs() <= 1e-8);
    }
}

#[test]
fn stump_half_difference() {
    let t = RegressionTree {
        nodes: vec![
            Node { value: 0.0, samples: 8.0, split: Some(Split { feature: 0, threshold: 0.0, left: 1, right: 2 }) },
            Node { value: 7.0, samples: 4.0, split: None },
            Node { value: 1.0, samples: 4.0, split: None },
        ],
        n_features: 2,
        max_depth: 1,
        min_samples_leaf: 1.0,
    };
    let phi = shap_tree(&t, &[-1.0, 5.0]).unwrap();
    assert_eq!(phi, vec![3.0, 0.0]);
    assert_eq!(brute_force(&t, &[-1.0, 5.0]), vec![3.0, 0.0]);
}

fn synthetic(n: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, 6, |_, j| if j < 2 { rng.random_range(0..3) as f64 } else { rng.random::<f64>() });
    let y = (0..n).map(|i| 2090.0 + 20.0 * x[(i, 0)] + 8.0 * x[(i, 1)] - 5.0 * x[(i, 2)] + rng.random::<f64>()).collect();
    (x, y, (0..6).map(|j| format!("f{j}")).collect())
}

fn quick_params() -> MixtureParams {
    let mut p = MixtureParams::default();
    for b in &mut p.base_learners {
        match &mut b.spec {
            LearnerSpec::RandomForest(f) => f.n_trees = 15,
            LearnerSpec::Gbm(g) => {
                g.n_rounds = 40;
                g.learning_rate = 0.2;
                g.max_depth = 3;
            }
            LearnerSpec::HistGbm(h) => {
                h.n_rounds = 40;
                h.learning_rate = 0.2;
                h.min_samples_leaf = 5.0;
            }
        }
    }
    p
}

#[test]
fn mixture_shap_is_additive_and_linear() {
    let (x, y, names) = synthetic(120, 1);
    let fit = fit_mixture(&x, &y, names, &quick_params()).unwrap();
    let model = &fit.model;
    for i in 0..x.nrows() {
        let row: Vec<f64> = x.row(i).iter().copied().collect();
        let e = explain_mixture(model, &row).unwrap();
        assert!(e.additivity_error() <= 1e-8, "row {i}: {}", e.additivity_error());
    }
    // linearity: SHAP of a weighted pair of ensembles
    let a = &model.base_models[1].model;
    let b = &model.base_models[2].model;
    let row: Vec<f64> = model.normalization.apply_row(&x.row(3).iter().copied().collect::<Vec<_>>());
    let (_, pa) = shap_trees(a, &row).unwrap();
    let (_, pb) = shap_trees(b, &row).unwrap();
    let mut joined = model.clone();
    joined.base_models = vec![model.base_models[1].clone(), model.base_models[2].clone()];
    joined.meta_model = LinearModel { weights: vec![0.3, 0.7], intercept: 1.0, regularization: Regularization::Ridge { lambda: 0.0 } };
    joined.voting_weights = [1.0, 0.0];
    joined.best_base = 0;
    let (_, pj) = mixture_shap(&joined, &x.row(3).iter().copied().collect::<Vec<_>>()).unwrap();
    for j in 0..6 {
        assert!((pj[j] - (0.3 * pa[j] + 0.7 * pb[j])).abs() < 1e-10);
    }
}

#[test]
fn unused_features_get_nothing() {
    let (x, y, names) = synthetic(100, 2);
    let mut p = quick_params();
    p.base_learners.truncate(2);
    let fit = fit_mixture(&x, &y, names, &p).unwrap();
    let used: Vec<bool> = (0..6)
        .map(|j| fit.model.base_models.iter().any(|m| m.model.trees.iter().any(|t| t.nodes.iter().any(|n| n.split.is_some_and(|s| s.feature == j)))))
        .collect();
    let imp = mean_abs_shap(&fit.model, &x).unwrap();
    assert_eq!(imp.len(), 6);
    for i in &imp {
        if !used[i.index] {
            assert_eq!(i.mean_abs_shap, 0.0);
        }
    }
    assert!(imp[0].index == 0, "{imp:?}");
}

#[test]
fn single_base_meta_is_near_identity() {
    let (x, y, names) = synthetic(150, 3);
    let mut p = quick_params();
    p.base_learners.retain(|b| b.name == "gbm");
    p.voting_weights = [1.0, 0.0];
    let fit = fit_mixture(&x, &y, names, &p).unwrap();
    let meta = &fit.model.meta_model;
    // posterior mean = ridge solution at lambda = alpha / beta on the out-of-fold predictions
    let Regularization::Bayesian { alpha, beta, .. } = meta.regularization else { panic!("not bayesian") };
    let oof = &fit.folds.oof[0];
    let (mx, my) = (oof.iter().sum::<f64>() / 150.0, y.iter().sum::<f64>() / 150.0);
    let sxx: f64 = oof.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = oof.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let w = sxy / (sxx + alpha / beta);
    assert!((meta.weights[0] - w).abs() < 1e-9 * w.abs(), "{} vs {w}", meta.weights[0]);
    assert!((meta.intercept - (my - w * mx)).abs() < 1e-9 * my.abs());
    assert!((meta.weights[0] - 1.0).abs() < 0.05, "{}", meta.weights[0]);
    let parts = fit.model.parts(&x).unwrap();
    for p in &parts {
        assert_eq!(p.prediction, meta.predict_row(&p.base));
    }
}

#[test]
fn persistence_round_trip_is_bit_identical() {
    let (x, y, names) = synthetic(80, 4);
    let fit = fit_mixture(&x, &y, names, &quick_params()).unwrap();
    let text = persist::to_json(&fit.model).unwrap();
    let back: MixtureModel = persist::from_json(&text).unwrap();
    assert_eq!(back, fit.model);
    let a = fit.model.predict(&x).unwrap();
    let b = back.predict(&x).unwrap();
    assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    assert_eq!(persist::to_json(&back).unwrap(), text);

    let bumped = text.replacen("\"format_version\": 1", "\"format_version\": 99", 1);
    assert!(matches!(persist::from_json::<MixtureModel>(&bumped), Err(LearnError::UnsupportedVersion(99))));
    assert!(persist::from_json::<MixtureModel>("{\"model\": {}}").is_err());
}

#[test]
fn mixture_is_deterministic() {
    let (x, y, names) = synthetic(80, 5);
    let a = fit_mixture(&x, &y, names.clone(), &quick_params()).unwrap();
    let b = fit_mixture(&x, &y, names, &quick_params()).unwrap();
    assert_eq!(persist::to_json(&a.model).unwrap(), persist::to_json(&b.model).unwrap());
}

#[test]
fn hist_gbm_tracks_exact_gbm() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = DMatrix::from_fn(1000, 5, |_, _| rng.random::<f64>());
    let y: Vec<f64> = (0..1000).map(|i| 10.0 * x[(i, 0)] + 5.0 * (x[(i, 1)] * 6.0).sin() + rng.random::<f64>()).collect();
    let r2 = |p: &[f64]| {
        let m = y.iter().sum::<f64>() / y.len() as f64;
        let tot: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
        1.0 - p.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / tot
    };
    let exact = fit_gbm(&x, &y, &GbmParams { n_rounds: 100, learning_rate: 0.1, max_depth: 4, ..Default::default() }).unwrap();
    let hist = fit_hist_gbm(&x, &y, &HistGbmParams { n_rounds: 100, learning_rate: 0.1, ..Default::default() }).unwrap();
    let (a, b) = (r2(&exact.predict(&x).unwrap()), r2(&hist.predict(&x).unwrap()));
    assert!((a - b).abs() <= 0.05, "{a} {b}");
}
