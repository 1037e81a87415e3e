//! Synthetic diazo compounds with labels that are an affine function of the
//! descriptor block plus Gaussian noise.

use std::collections::HashSet;

use diazoir::{normalize_diazo, parse_smiles, write_smiles, ComboTable, Featurizer, SamdVector};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};

pub const OFFSET: f64 = 2090.0;
pub const NOISE_SD: f64 = 3.0;

/// `(feature name, weight, centre)`. Names without a domain suffix apply to both domains.
pub const COEFFICIENTS: [(&str, f64, f64); 10] = [
    ("O_DOUBLE_R1", 30.0, 0.0),
    ("O_DOUBLE_R2", 22.0, 0.0),
    ("H_SINGLE", -8.0, 0.0),
    ("O_SINGLE", 6.0, 0.0),
    ("N_SINGLE", -10.0, 0.0),
    ("C_DOUBLE", -12.0, 0.0),
    ("N_TRIPLE", 8.0, 0.0),
    ("C_SINGLE", -3.0, 0.0),
    ("electronegativity", 15.0, 2.55),
    ("covalent_radius", -0.3, 77.0),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticParams {
    pub n: usize,
    pub seed: u64,
    pub noise_sd: f64,
}

impl SyntheticParams {
    pub fn new(n: usize, seed: u64) -> Self {
        SyntheticParams { n, seed, noise_sd: NOISE_SD }
    }
}

fn weight(name: &str) -> (f64, f64) {
    for &(key, w, c) in &COEFFICIENTS {
        if name == key || name.strip_suffix("_R1").or_else(|| name.strip_suffix("_R2")) == Some(key) {
            return (w, c);
        }
    }
    (0.0, 0.0)
}

/// Noise-free label under the default or any other combo table.
pub fn synthetic_label(samd: &SamdVector, table: &ComboTable) -> f64 {
    let names = table.feature_names();
    let mut y = OFFSET;
    for (name, v) in names.iter().zip(samd.values()) {
        let (w, c) = weight(name);
        y += w * (v - c);
    }
    y
}

const ALKYL: [&str; 10] = ["C", "CC", "CCC", "C(C)C", "CCCC", "CC(C)C", "C(C)(C)C", "C1CCCCC1", "C1CC1", "CCc1ccccc1"];
const ARYL_SUBST: [&str; 14] = [
    "C", "OC", "F", "Cl", "Br", "I", "C(F)(F)F", "[N+](=O)[O-]", "C#N", "C(=O)OC", "N(C)C", "SC", "CC", "OCC",
];
const ESTER_ALKYL: [&str; 8] = ["C", "CC", "C(C)C", "C(C)(C)C", "Cc1ccccc1", "CC=C", "CCCl", "CC(F)(F)F"];
const KETONE_R: [&str; 8] = ["C", "CC", "C(C)C", "C1CC1", "c1ccccc1", "c1ccc(OC)cc1", "c1ccc(Cl)cc1", "c1ccc([N+](=O)[O-])cc1"];
const AMIDE: [&str; 5] = ["C(=O)N(C)C", "C(=O)NC", "C(=O)N1CCCC1", "C(=O)N1CCOCC1", "C(=O)Nc1ccccc1"];
const OTHER: [&str; 12] = [
    "C#N",
    "S(=O)(=O)c1ccc(C)cc1",
    "S(=O)(=O)C",
    "P(=O)(OC)OC",
    "P(=O)(OCC)OCC",
    "[Si](C)(C)C",
    "C(F)(F)F",
    "C=C",
    "C=CC",
    "C=Cc1ccccc1",
    "C#CC",
    "C#C[Si](C)(C)C",
];

/// Substituent fragments, each written so its first atom bonds to the diazo carbon.
/// The empty string stands for hydrogen.
pub fn fragments() -> Vec<String> {
    let mut out = vec![String::new()];
    out.extend(ALKYL.iter().map(|s| s.to_string()));
    out.push("c1ccccc1".into());
    for x in ARYL_SUBST {
        out.push(format!("c1ccc({x})cc1"));
        out.push(format!("c1cccc({x})c1"));
    }
    out.extend(["c1ccccn1", "c1ccsc1", "c1ccoc1"].map(String::from));
    out.extend(ESTER_ALKYL.iter().map(|a| format!("C(=O)O{a}")));
    out.extend(KETONE_R.iter().map(|r| format!("C(=O){r}")));
    out.extend(AMIDE.iter().map(|s| s.to_string()));
    out.extend(OTHER.iter().map(|s| s.to_string()));
    out
}

fn assemble(r1: &str, r2: &str) -> String {
    match (r1.is_empty(), r2.is_empty()) {
        (true, true) => "C=[N+]=[N-]".into(),
        (false, true) => format!("[N-]=[N+]=C{r1}"),
        (true, false) => format!("[N-]=[N+]=C{r2}"),
        (false, false) => format!("[N-]=[N+]=C({r1}){r2}"),
    }
}

/// Draw `n` distinct compounds. Carbonyl substituents are drawn about half the time.
pub fn generate(params: &SyntheticParams) -> Result<Dataset> {
    let frags = fragments();
    let carbonyl: Vec<&String> = frags.iter().filter(|f| f.starts_with("C(=O)")).collect();
    let featurizer = Featurizer::default();
    let noise = Normal::new(0.0, params.noise_sd)
        .map_err(|e| HarnessError::Invalid(format!("noise_sd {}: {e}", params.noise_sd)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(params.n);
    let mut attempts = 0usize;
    while rows.len() < params.n {
        attempts += 1;
        if attempts > 200 * params.n.max(100) {
            return Err(HarnessError::Invalid(format!("could not draw {} distinct compounds", params.n)));
        }
        let pick = |rng: &mut ChaCha8Rng| -> String {
            if rng.random_bool(0.5) {
                carbonyl.choose(rng).expect("non-empty").to_string()
            } else {
                frags.choose(rng).expect("non-empty").clone()
            }
        };
        let a = pick(&mut rng);
        let b = pick(&mut rng);
        let (r1, r2) = if a <= b { (b, a) } else { (a, b) };
        let smiles = assemble(&r1, &r2);
        let mol = parse_smiles(&smiles).map_err(|e| HarnessError::Invalid(format!("{smiles}: {e}")))?;
        if !seen.insert(write_smiles(&normalize_diazo(&mol))) {
            continue;
        }
        let row = featurizer.featurize(&mol)?;
        let y = synthetic_label(&row.samd, &featurizer.table) + noise.sample(&mut rng);
        let y = (y * 100.0).round() / 100.0;
        rows.push((format!("syn-{:05}", rows.len() + 1), smiles, y));
    }
    Dataset::from_rows(rows, &format!("synthetic(n={}, seed={})", params.n, params.seed), true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_by_hand() {
        let f = Featurizer::default();
        // Methyl diazoacetate: R1 = ester carbon (O double 1, O single 1), R2 = H.
        let row = f.featurize_smiles("COC(=O)C=[N+]=[N-]").unwrap();
        let h_terms = 15.0 * (2.20 - 2.55) - 0.3 * (37.0 - 77.0);
        let expected = OFFSET + 30.0 + 6.0 + h_terms;
        assert!((synthetic_label(&row.samd, &f.table) - expected).abs() < 1e-9);
    }

    #[test]
    fn all_fragments_parse() {
        let frags = fragments();
        for a in &frags {
            let s = assemble(a, "C");
            let m = parse_smiles(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
            assert_eq!(diazoir::find_diazo(&m).len(), 1, "{s}");
        }
        let unique: HashSet<_> = frags.iter().collect();
        assert_eq!(unique.len(), frags.len());
    }

    #[test]
    fn distinct_and_seeded() {
        let a = generate(&SyntheticParams::new(300, 5)).unwrap();
        let b = generate(&SyntheticParams::new(300, 5)).unwrap();
        assert_eq!(a.len(), 300);
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.issues.iter().filter(|i| matches!(i.kind, crate::dataset::IssueKind::DuplicateSmiles { .. })).count(), 0);
        let c = generate(&SyntheticParams::new(300, 6)).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn signal_has_spread() {
        let ds = generate(&SyntheticParams::new(500, 1)).unwrap();
        let y = ds.wavenumbers();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
        assert!(sd > 15.0, "sd {sd}");
    }
}
