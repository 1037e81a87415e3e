//! Feature matrix export with a layout sidecar.

use diazoir::Featurizer;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};
use crate::report::SCHEMA_VERSION;

/// Leading columns of every exported feature matrix, before the layout.
pub const KEY_COLUMNS: [&str; 3] = ["id", "diazo_carbon", "wavenumber_cm1"];

/// Describes the columns of an exported feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutSidecar {
    pub schema_version: u32,
    pub combo_table: String,
    pub radius: u32,
    pub nbits: usize,
    pub samd_width: usize,
    pub width: usize,
    pub key_columns: Vec<String>,
    pub columns: Vec<String>,
}

impl LayoutSidecar {
    pub fn new(f: &Featurizer) -> Self {
        LayoutSidecar {
            schema_version: SCHEMA_VERSION,
            combo_table: f.table.version().to_string(),
            radius: f.radius,
            nbits: f.nbits,
            samd_width: f.samd_width(),
            width: f.width(),
            key_columns: KEY_COLUMNS.iter().map(|s| s.to_string()).collect(),
            columns: f.layout(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serialises");
        s.push('\n');
        s
    }
}

/// One row per record (primary diazo context), or one per context with `all_diazo`.
/// `diazo_carbon` is the atom index in the input SMILES.
pub fn features_csv(ds: &Dataset, f: &Featurizer, all_diazo: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = KEY_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(f.layout());
    w.write_record(&header).map_err(csv_err)?;
    for r in &ds.rows {
        let rows = if all_diazo { f.featurize_all(&r.molecule) } else { f.featurize(&r.molecule).map(|x| vec![x]) }
            .map_err(|e| HarnessError::Invalid(format!("row {} ({}): {e}", r.line, r.id)))?;
        for row in rows {
            let mut rec = vec![r.id.clone(), row.context.diazo_carbon.to_string(), r.wavenumber.to_string()];
            rec.extend(row.values.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Invalid(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[(&str, &str, f64)]) -> Dataset {
        Dataset::from_rows(rows.iter().map(|&(a, b, c)| (a, b, c)), "test", false).unwrap()
    }

    #[test]
    fn three_rows_default_width() {
        let d = ds(&[("a", "C=[N+]=[N-]", 2087.3), ("b", "CCOC(=O)C=[N+]=[N-]", 2110.0), ("c", "[N-]=[N+]=Cc1ccccc1", 2060.0)]);
        let f = Featurizer::default();
        let text = features_csv(&d, &f, false).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        for l in &lines {
            assert_eq!(l.split(',').count(), 3 + 2088);
        }
        assert!(lines[0].starts_with("id,diazo_carbon,wavenumber_cm1,electronegativity_R1,"));
        assert!(lines[1].starts_with("a,0,2087.3,"));
        let side = LayoutSidecar::new(&f);
        assert_eq!(side.columns.len(), side.width);
        assert_eq!(&side.columns[..], &lines[0].split(',').skip(3).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn all_diazo_emits_each_context() {
        let d = ds(&[("bis", "[N-]=[N+]=CC(=O)C(=O)C=[N+]=[N-]", 2100.0)]);
        let f = Featurizer::default();
        assert_eq!(features_csv(&d, &f, false).unwrap().lines().count(), 2);
        let all = features_csv(&d, &f, true).unwrap();
        let carbons: Vec<&str> = all.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(carbons.len(), 2);
        assert_ne!(carbons[0], carbons[1]);
    }
}
