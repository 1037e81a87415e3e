use diazoir::{find_diazo, parse_smiles, BondOrder, SmilesError};

#[test]
fn charge_spellings() {
    for (s, q) in [("[N+]", 1), ("[O-]", -1), ("[S++]", 2), ("[O--]", -2), ("[N+2]", 2), ("[C-3]", -3), ("[B-]", -1)] {
        assert_eq!(parse_smiles(s).unwrap().atom(0).formal_charge, q, "{s}");
    }
}

#[test]
fn ring_closure_across_components() {
    let m = parse_smiles("C1.C1").unwrap();
    assert_eq!(m.bonds().len(), 1);
    assert_eq!(m.components().len(), 1);
    let m = parse_smiles("[CH2]=1.[N+]=1=[N-]").unwrap();
    assert_eq!(m.bond_between(0, 1), Some(BondOrder::Double));
    assert_eq!(find_diazo(&m).len(), 1);
}

#[test]
fn aromatic_hydrogens() {
    let benzene = parse_smiles("c1ccccc1").unwrap();
    assert!(benzene.atoms().iter().all(|a| a.explicit_h_count == 1));
    let pyridine = parse_smiles("n1ccccc1").unwrap();
    assert_eq!(pyridine.atom(0).explicit_h_count, 0);
    let pyrrole = parse_smiles("[nH]1cccc1").unwrap();
    assert_eq!(pyrrole.atom(0).explicit_h_count, 1);
}

#[test]
fn directional_bonds_are_single() {
    let m = parse_smiles("F\\C=C\\F").unwrap();
    assert_eq!(m.bond_between(0, 1), Some(BondOrder::Single));
    assert_eq!(m.bond_between(2, 3), Some(BondOrder::Single));
}

#[test]
fn unsupported_input_is_an_error() {
    for s in ["*C", "C>C", "[se]1cccc1", "[Se]", "[As]", "[He]", "CC>>CC", "C$C", "[Cu+2]"] {
        assert!(parse_smiles(s).is_err(), "{s} should not parse");
    }
}

#[test]
fn valence_limits() {
    assert!(parse_smiles("FC(F)(F)(F)F").is_err());
    assert!(parse_smiles("O=S(=O)(O)O").is_ok());
    assert!(parse_smiles("O=P(O)(O)O").is_ok());
    assert!(parse_smiles("O=N(=O)C").is_ok());
    assert!(matches!(parse_smiles("C=[N+](=C)=C"), Err(SmilesError::ValenceViolation { .. })));
    assert!(matches!(parse_smiles("O=O=O"), Err(SmilesError::ValenceViolation { .. })));
}
