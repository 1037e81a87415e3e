//! Canonical atom ordering by iterative invariant refinement.

use crate::molecule::Molecule;

/// Initial per-atom invariant tuple: heavy degree, atomic number, charge,
/// hydrogen count, aromatic flag, ring membership.
fn initial_invariant(m: &Molecule, i: usize) -> (usize, u8, i8, u8, bool, bool) {
    let a = m.atom(i);
    (
        m.degree(i),
        a.element.atomic_number(),
        a.formal_charge,
        a.explicit_h_count,
        a.aromatic,
        m.is_ring_atom(i),
    )
}

fn dense_rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).expect("key present")).collect()
}

fn class_count(ranks: &[usize]) -> usize {
    let mut r = ranks.to_vec();
    r.sort_unstable();
    r.dedup();
    r.len()
}

fn refine(m: &Molecule, mut ranks: Vec<usize>) -> Vec<usize> {
    let mut classes = class_count(&ranks);
    loop {
        let keys: Vec<(usize, Vec<(u8, usize)>)> = (0..m.atom_count())
            .map(|i| {
                let mut nb: Vec<(u8, usize)> =
                    m.neighbors(i).map(|(n, order)| (order.code(), ranks[n])).collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = dense_rank(&keys);
        let next_classes = class_count(&next);
        ranks = next;
        if next_classes == classes {
            return ranks;
        }
        classes = next_classes;
    }
}

/// Returns atom indices in canonical order: `order[k]` is the atom placed at position `k`.
///
/// Symmetry-equivalent atoms left tied after refinement are split one at a
/// time, choosing the lowest input index in the lowest tied class, and the
/// refinement is repeated until every atom has a distinct rank.
pub fn canonical_atom_order(m: &Molecule) -> Vec<usize> {
    let n = m.atom_count();
    if n == 0 {
        return Vec::new();
    }
    let init: Vec<_> = (0..n).map(|i| initial_invariant(m, i)).collect();
    let mut ranks = refine(m, dense_rank(&init));
    while class_count(&ranks) < n {
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = (0..n).find(|&r| counts[r] > 1).expect("tie exists");
        let pick = (0..n).find(|&i| ranks[i] == tied).expect("member exists");
        let split: Vec<(usize, bool)> = ranks.iter().enumerate().map(|(i, &r)| (r, i != pick)).collect();
        ranks = refine(m, dense_rank(&split));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| ranks[i]);
    order
}

/// Atom attributes and bond list relabelled into canonical order. Two
/// molecules are isomorphic exactly when their keys are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalKey {
    pub atoms: Vec<(u8, i8, u8, bool)>,
    pub bonds: Vec<(usize, usize, u8)>,
}

pub fn canonical_key(m: &Molecule) -> CanonicalKey {
    let order = canonical_atom_order(m);
    let mut pos = vec![0usize; order.len()];
    for (k, &a) in order.iter().enumerate() {
        pos[a] = k;
    }
    let atoms = order
        .iter()
        .map(|&i| {
            let a = m.atom(i);
            (a.element.atomic_number(), a.formal_charge, a.explicit_h_count, a.aromatic)
        })
        .collect();
    let mut bonds: Vec<(usize, usize, u8)> = m
        .bonds()
        .iter()
        .map(|b| {
            let (x, y) = (pos[b.endpoints.0], pos[b.endpoints.1]);
            (x.min(y), x.max(y), b.order.code())
        })
        .collect();
    bonds.sort_unstable();
    CanonicalKey { atoms, bonds }
}
