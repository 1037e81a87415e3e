//! Featurised datasets.

use diazoir::{Featurizer, Fingerprint, SamdVector};
use diazoir_learn::DMatrix;

use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub ids: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    pub fingerprints: Vec<Fingerprint>,
    pub samd: Vec<SamdVector>,
    pub layout: Vec<String>,
}

impl FeatureSet {
    pub fn build(ds: &Dataset, f: &Featurizer) -> Result<FeatureSet> {
        let mut rows = Vec::with_capacity(ds.len());
        for r in &ds.rows {
            let row = f
                .featurize(&r.molecule)
                .map_err(|e| HarnessError::Invalid(format!("row {} ({}): {e}", r.line, r.id)))?;
            rows.push(row);
        }
        let width = f.width();
        let x = DMatrix::from_fn(rows.len(), width, |i, j| rows[i].values[j]);
        Ok(FeatureSet {
            ids: ds.rows.iter().map(|r| r.id.clone()).collect(),
            x,
            y: ds.wavenumbers(),
            fingerprints: rows.iter().map(|r| r.fingerprint.clone()).collect(),
            samd: rows.into_iter().map(|r| r.samd).collect(),
            layout: f.layout(),
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> FeatureSet {
        FeatureSet {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            x: DMatrix::from_fn(idx.len(), self.x.ncols(), |i, j| self.x[(idx[i], j)]),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            fingerprints: idx.iter().map(|&i| self.fingerprints[i].clone()).collect(),
            samd: idx.iter().map(|&i| self.samd[i].clone()).collect(),
            layout: self.layout.clone(),
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }
}
