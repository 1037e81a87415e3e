mod common;

use diazoir::{find_diazo, normalize_diazo, parse_smiles, write_smiles, Domain, Element, BondOrder, Featurizer};

#[test]
fn corpus_has_thirty_entries() {
    let c = common::corpus();
    assert_eq!(c.len(), 30);
    let mut names: Vec<&str> = c.iter().map(|e| e.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), 30);
}

#[test]
fn every_entry_parses_with_its_diazo_groups() {
    for e in common::corpus() {
        let m = parse_smiles(&e.smiles).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        assert_eq!(find_diazo(&m).len(), e.diazo_groups, "{}", e.name);
        assert_eq!(find_diazo(&normalize_diazo(&m)).len(), e.diazo_groups, "{} after normalising", e.name);
    }
}

#[test]
fn every_entry_featurizes() {
    let f = Featurizer::default();
    for e in common::corpus() {
        let row = f.featurize_smiles(&e.smiles).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        assert_eq!(row.values.len(), f.width(), "{}", e.name);
        assert!(row.values.iter().all(|v| v.is_finite()), "{}", e.name);
    }
}

#[test]
fn spellings_of_one_compound_agree() {
    // ethyl diazoacetate written three ways
    let f = Featurizer::default();
    let forms = ["CCOC(=O)C=[N+]=[N-]", "CCOC(=O)C=N#N", "CCOC(=O)[CH-][N+]#N"];
    let keys: Vec<String> = forms.iter().map(|s| write_smiles(&normalize_diazo(&parse_smiles(s).unwrap()))).collect();
    assert!(keys.iter().all(|k| k == &keys[0]), "{keys:?}");
    let rows: Vec<_> = forms.iter().map(|s| f.featurize_smiles(s).unwrap()).collect();
    for r in &rows[1..] {
        assert_eq!(r.values, rows[0].values);
    }
}

#[test]
fn diazomalonate_is_symmetric() {
    let f = Featurizer::default();
    let row = f.featurize_smiles("COC(=O)C(=[N+]=[N-])C(=O)OC").unwrap();
    let t = &f.table;
    for d in [Domain::R1, Domain::R2] {
        assert_eq!(row.samd.count(t, Element::O, BondOrder::Double, d), Some(1));
        assert_eq!(row.samd.count(t, Element::O, BondOrder::Single, d), Some(1));
    }
}

#[test]
fn non_diazo_is_rejected() {
    let f = Featurizer::default();
    for s in ["CCO", "c1ccccc1", "CC(=O)N=[N+]=[N-]", "N#N"] {
        assert!(f.featurize_smiles(s).is_err(), "{s}");
    }
}
