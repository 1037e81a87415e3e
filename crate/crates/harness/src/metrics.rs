//! Regression metrics and correlation.

use diazoir::{BondOrder, ComboTable, Domain, Element, SamdVector};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    /// `None` when the truth has zero variance.
    pub r2: Option<f64>,
    pub zero_variance_truth: bool,
    pub rmse: f64,
    pub mae: f64,
}

pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<EvalReport> {
    if y_true.len() != y_pred.len() {
        return Err(HarnessError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(HarnessError::TooFewRows { need: 1, got: 0 });
    }
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let mut abs = 0.0;
    for (t, p) in y_true.iter().zip(y_pred) {
        ss_res += (t - p) * (t - p);
        ss_tot += (t - mean) * (t - mean);
        abs += (t - p).abs();
    }
    let constant = y_true.iter().all(|&t| t == y_true[0]);
    Ok(EvalReport {
        n: y_true.len(),
        r2: if constant { None } else { Some(1.0 - ss_res / ss_tot) },
        zero_variance_truth: constant,
        rmse: (ss_res / n).sqrt(),
        mae: abs / n,
    })
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(HarnessError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(HarnessError::TooFewRows { need: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(HarnessError::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(HarnessError::ZeroVariance("y"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// O_DOUBLE_R1 + O_DOUBLE_R2; 0 when the table has no O double entry.
pub fn carbonyl_count(samd: &SamdVector, table: &ComboTable) -> u32 {
    Domain::BOTH.iter().filter_map(|&d| samd.count(table, Element::O, BondOrder::Double, d)).sum()
}
