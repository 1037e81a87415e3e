mod common;

use diazoir::{canonical_atom_order, canonical_key, find_diazo, parse_smiles, write_smiles, Featurizer, Molecule};
use proptest::prelude::*;

fn labels_in_canonical_order(m: &Molecule) -> Vec<(u8, i8, u8, bool)> {
    canonical_atom_order(m)
        .into_iter()
        .map(|i| {
            let a = m.atom(i);
            (a.element.atomic_number(), a.formal_charge, a.explicit_h_count, a.aromatic)
        })
        .collect()
}

#[test]
fn identity_scramble_reproduces_the_graph() {
    for e in common::corpus() {
        let m = parse_smiles(&e.smiles).unwrap();
        let id: Vec<usize> = (0..m.atom_count()).collect();
        let back = parse_smiles(&common::scrambled(&m, &id)).unwrap();
        assert_eq!(back.atoms(), m.atoms(), "{}", e.name);
        for i in 0..m.atom_count() {
            for j in 0..m.atom_count() {
                assert_eq!(back.bond_between(i, j), m.bond_between(i, j));
            }
        }
    }
}

#[test]
fn reversed_numbering() {
    let f = Featurizer::default();
    for e in common::corpus() {
        let m = parse_smiles(&e.smiles).unwrap();
        let rev: Vec<usize> = (0..m.atom_count()).rev().collect();
        let r = parse_smiles(&common::scrambled(&m, &rev)).unwrap();
        assert_eq!(write_smiles(&r), write_smiles(&m), "{}", e.name);
        assert_eq!(f.featurize(&r).unwrap().values, f.featurize(&m).unwrap().values, "{}", e.name);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn invariant_under_renumbering(entry in 0usize..30, perm_seed in any::<u64>()) {
        let corpus = common::corpus();
        let m = parse_smiles(&corpus[entry].smiles).unwrap();
        let mut perm: Vec<usize> = (0..m.atom_count()).collect();
        // Fisher-Yates with a splitmix stream
        let mut s = perm_seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            perm.swap(i, (z % (i as u64 + 1)) as usize);
        }
        let p = parse_smiles(&common::scrambled(&m, &perm)).unwrap();

        prop_assert_eq!(labels_in_canonical_order(&p), labels_in_canonical_order(&m));
        prop_assert_eq!(canonical_key(&p), canonical_key(&m));
        prop_assert_eq!(write_smiles(&p), write_smiles(&m));

        let f = Featurizer::default();
        prop_assert_eq!(f.fingerprint(&p).unwrap(), f.fingerprint(&m).unwrap());
        prop_assert_eq!(find_diazo(&p).len(), find_diazo(&m).len());
        let (a, b) = (f.featurize(&p).unwrap(), f.featurize(&m).unwrap());
        prop_assert_eq!(a.values, b.values);
    }
}
