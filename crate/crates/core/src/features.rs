//! Full feature rows: descriptor block followed by fingerprint bits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diazo::{find_diazo, normalize_diazo, primary_context, DiazoContext};
use crate::fingerprint::{morgan_fingerprint, Fingerprint, FingerprintError, DEFAULT_NBITS, DEFAULT_RADIUS};
use crate::molecule::Molecule;
use crate::samd::{featurize_samd, ComboTable, SamdError, SamdVector};
use crate::smiles::{parse_smiles, SmilesError};

#[derive(Debug, Error)]
pub enum FeaturizeError {
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error("no diazo group found")]
    NoDiazoGroup,
    #[error(transparent)]
    Samd(#[from] SamdError),
    #[error(transparent)]
    Fingerprint(#[from] FingerprintError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Featurizer {
    pub table: ComboTable,
    pub radius: u32,
    pub nbits: usize,
}

#[derive(Debug, Clone)]
pub struct FeatureRow {
    pub values: Vec<f64>,
    pub samd: SamdVector,
    pub fingerprint: Fingerprint,
    pub context: DiazoContext,
}

impl Default for Featurizer {
    fn default() -> Self {
        Featurizer { table: ComboTable::default_table(), radius: DEFAULT_RADIUS, nbits: DEFAULT_NBITS }
    }
}

impl Featurizer {
    pub fn new(table: ComboTable, radius: u32, nbits: usize) -> Result<Self, FeaturizeError> {
        Fingerprint::empty(nbits, radius)?;
        Ok(Featurizer { table, radius, nbits })
    }

    /// Column names: descriptor block, then `fp_0000` .. `fp_{nbits-1}`.
    pub fn layout(&self) -> Vec<String> {
        let mut names = self.table.feature_names();
        let width = (self.nbits - 1).to_string().len().max(4);
        names.extend((0..self.nbits).map(|b| format!("fp_{b:0width$}")));
        names
    }

    pub fn width(&self) -> usize {
        self.table.feature_count() + self.nbits
    }

    pub fn samd_width(&self) -> usize {
        self.table.feature_count()
    }

    pub fn fingerprint(&self, m: &Molecule) -> Result<Fingerprint, FeaturizeError> {
        Ok(morgan_fingerprint(&normalize_diazo(m), self.radius, self.nbits)?)
    }

    fn row(&self, m: &Molecule, ctx: &DiazoContext, fp: &Fingerprint) -> Result<FeatureRow, FeaturizeError> {
        let samd = featurize_samd(ctx, m, &self.table)?;
        let mut values = samd.values();
        values.extend(fp.as_features());
        Ok(FeatureRow { values, samd, fingerprint: fp.clone(), context: ctx.clone() })
    }

    /// Featurise the molecule's primary diazo context.
    pub fn featurize(&self, m: &Molecule) -> Result<FeatureRow, FeaturizeError> {
        let contexts = find_diazo(m);
        let ctx = primary_context(&contexts, m).ok_or(FeaturizeError::NoDiazoGroup)?;
        let fp = self.fingerprint(m)?;
        self.row(m, ctx, &fp)
    }

    /// One row per diazo context, in canonical order of the diazo carbons.
    pub fn featurize_all(&self, m: &Molecule) -> Result<Vec<FeatureRow>, FeaturizeError> {
        let contexts = find_diazo(m);
        if contexts.is_empty() {
            return Err(FeaturizeError::NoDiazoGroup);
        }
        let fp = self.fingerprint(m)?;
        contexts.iter().map(|c| self.row(m, c, &fp)).collect()
    }

    pub fn featurize_smiles(&self, smiles: &str) -> Result<FeatureRow, FeaturizeError> {
        self.featurize(&parse_smiles(smiles)?)
    }
}
