//! Diazo group location and R1/R2 domain assignment.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::canon::canonical_atom_order;
use crate::element::Element;
use crate::molecule::{BondOrder, Molecule};

/// A substituent position on the diazo carbon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Substituent {
    Atom(usize),
    /// A hydrogen carried implicitly (as a hydrogen count) on the diazo carbon.
    ImplicitH,
}

impl Substituent {
    pub fn atom(self) -> Option<usize> {
        match self {
            Substituent::Atom(i) => Some(i),
            Substituent::ImplicitH => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiazoContext {
    pub diazo_carbon: usize,
    /// (inner N bonded to carbon, terminal N)
    pub diazo_nitrogens: (usize, usize),
    pub r1_root: Substituent,
    pub r2_root: Substituent,
}

/// Rewrite the neutral `C=N#N` and ylidic `[C-]-[N+]#N` spellings of a diazo
/// group into `C=[N+]=[N-]`. Atom numbering is preserved.
pub fn normalize_diazo(m: &Molecule) -> Molecule {
    let mut atom_edits: Vec<(usize, i8)> = Vec::new();
    let mut bond_edits: Vec<((usize, usize), BondOrder)> = Vec::new();
    for c in 0..m.atom_count() {
        let ca = m.atom(c);
        if ca.element != Element::C {
            continue;
        }
        for (n1, cn) in m.neighbors(c) {
            let a1 = m.atom(n1);
            if a1.element != Element::N || m.degree(n1) != 2 {
                continue;
            }
            for (n2, nn) in m.neighbors(n1) {
                let a2 = m.atom(n2);
                if n2 == c || a2.element != Element::N || m.degree(n2) != 1 || nn != BondOrder::Triple {
                    continue;
                }
                let neutral = cn == BondOrder::Double && a1.formal_charge == 0 && a2.formal_charge == 0;
                let ylide = cn == BondOrder::Single
                    && ca.formal_charge == -1
                    && a1.formal_charge == 1
                    && a2.formal_charge == 0;
                if neutral {
                    atom_edits.extend([(n1, 1), (n2, -1)]);
                    bond_edits.push(((n1, n2), BondOrder::Double));
                } else if ylide {
                    atom_edits.extend([(c, 0), (n2, -1)]);
                    bond_edits.extend([((c, n1), BondOrder::Double), ((n1, n2), BondOrder::Double)]);
                }
            }
        }
    }
    if atom_edits.is_empty() {
        return m.clone();
    }
    m.with_edits(
        |atoms| {
            for &(i, q) in &atom_edits {
                atoms[i].formal_charge = q;
            }
        },
        |bonds| {
            for b in bonds.iter_mut() {
                for &((x, y), order) in &bond_edits {
                    if (b.endpoints.0 == x && b.endpoints.1 == y) || (b.endpoints.0 == y && b.endpoints.1 == x) {
                        b.order = order;
                    }
                }
            }
        },
    )
}

/// Every `C=[N+]=[N-]` match (terminal nitrogen), also recognising the neutral
/// and ylidic spellings, with R1/R2 already assigned.
pub fn find_diazo(m: &Molecule) -> Vec<DiazoContext> {
    let norm = normalize_diazo(m);
    let m = &norm;
    let canon = canonical_positions(m);
    let mut out = Vec::new();
    for c in canonical_atom_order(m) {
        let ca = m.atom(c);
        if ca.element != Element::C || ca.formal_charge != 0 {
            continue;
        }
        for (n1, cn) in m.neighbors(c) {
            let a1 = m.atom(n1);
            if cn != BondOrder::Double || a1.element != Element::N || a1.formal_charge != 1 || m.degree(n1) != 2 {
                continue;
            }
            let terminal = m.neighbors(n1).find(|&(n2, nn)| {
                let a2 = m.atom(n2);
                n2 != c
                    && nn == BondOrder::Double
                    && a2.element == Element::N
                    && a2.formal_charge == -1
                    && m.degree(n2) == 1
                    && a2.explicit_h_count == 0
            });
            let Some((n2, _)) = terminal else { continue };
            let mut roots: Vec<Substituent> =
                m.neighbors(c).filter(|&(n, _)| n != n1).map(|(n, _)| Substituent::Atom(n)).collect();
            for _ in 0..ca.explicit_h_count {
                roots.push(Substituent::ImplicitH);
            }
            roots.truncate(2);
            while roots.len() < 2 {
                roots.push(Substituent::ImplicitH);
            }
            let ctx = DiazoContext {
                diazo_carbon: c,
                diazo_nitrogens: (n1, n2),
                r1_root: roots[0],
                r2_root: roots[1],
            };
            let (r1, r2) = assign_domains_with(&ctx, m, &canon);
            out.push(DiazoContext { r1_root: r1, r2_root: r2, ..ctx });
        }
    }
    out
}

fn canonical_positions(m: &Molecule) -> Vec<usize> {
    let order = canonical_atom_order(m);
    let mut pos = vec![0; order.len()];
    for (k, &a) in order.iter().enumerate() {
        pos[a] = k;
    }
    pos
}

/// Ranking key for a root: atomic number, neighbour-shell atomic-number sum,
/// neighbour bond-order sum (doubled). The diazo carbon is excluded from the shell.
fn rank_key(sub: Substituent, diazo_carbon: usize, m: &Molecule) -> Option<(u8, u32, u32)> {
    let i = sub.atom()?;
    let a = m.atom(i);
    let mut shell = a.explicit_h_count as u32;
    let mut orders = 2 * a.explicit_h_count as u32;
    for (n, order) in m.neighbors(i) {
        if n == diazo_carbon {
            continue;
        }
        shell += m.atom(n).element.atomic_number() as u32;
        orders += order.twice_order() as u32;
    }
    Some((a.element.atomic_number(), shell, orders))
}

/// Ordering of two roots, `Greater` meaning `a` ranks above `b`.
fn compare_roots(a: Substituent, b: Substituent, diazo_carbon: usize, m: &Molecule, canon: &[usize]) -> Ordering {
    match (rank_key(a, diazo_carbon, m), rank_key(b, diazo_carbon, m)) {
        (None, None) => Ordering::Equal,
        (Some(_), None) => Ordering::Greater,
        (None, Some(_)) => Ordering::Less,
        (Some(ka), Some(kb)) => ka.cmp(&kb).then_with(|| {
            // earlier canonical position ranks higher
            let (ia, ib) = (a.atom().unwrap(), b.atom().unwrap());
            canon[ib].cmp(&canon[ia])
        }),
    }
}

/// Order the two roots of `ctx` as (R1, R2): heavier atom first, ties broken by
/// neighbour-shell atomic numbers, then neighbour bond orders, then canonical
/// order. Implicit hydrogens always rank last.
pub fn assign_domains(ctx: &DiazoContext, m: &Molecule) -> (Substituent, Substituent) {
    assign_domains_with(ctx, m, &canonical_positions(m))
}

fn assign_domains_with(ctx: &DiazoContext, m: &Molecule, canon: &[usize]) -> (Substituent, Substituent) {
    let (a, b) = (ctx.r1_root, ctx.r2_root);
    if compare_roots(a, b, ctx.diazo_carbon, m, canon) == Ordering::Less {
        (b, a)
    } else {
        (a, b)
    }
}

/// The context a single-row featurisation uses: highest-ranking R1 root, then
/// earliest diazo carbon in canonical order.
pub fn primary_context<'c>(contexts: &'c [DiazoContext], m: &Molecule) -> Option<&'c DiazoContext> {
    let canon = canonical_positions(m);
    // larger key wins; canonical positions are negated so earlier ranks higher
    let key = |c: &DiazoContext| {
        let root = rank_key(c.r1_root, c.diazo_carbon, m);
        let root_pos = c.r1_root.atom().map(|i| std::cmp::Reverse(canon[i]));
        (root, root_pos, std::cmp::Reverse(canon[c.diazo_carbon]))
    };
    contexts.iter().max_by_key(|c| key(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    const FIG4: &str = "COC(=O)C(=[N+]=[N-])C/C=C/c1ccc(OC)cc1";

    #[test]
    fn diazomethane_both_hydrogen() {
        let m = parse_smiles("C=[N+]=[N-]").unwrap();
        let ctx = find_diazo(&m);
        assert_eq!(ctx.len(), 1);
        assert_eq!(ctx[0].r1_root, Substituent::ImplicitH);
        assert_eq!(ctx[0].r2_root, Substituent::ImplicitH);
        assert_eq!(ctx[0].diazo_carbon, 0);
        assert_eq!(ctx[0].diazo_nitrogens, (1, 2));
    }

    #[test]
    fn acetyl_methyl() {
        let m = parse_smiles("CC(=O)C(=[N+]=[N-])C").unwrap();
        let ctx = find_diazo(&m);
        assert_eq!(ctx.len(), 1);
        assert_eq!(ctx[0].diazo_carbon, 3);
        // carbonyl carbon (1) outranks methyl (6) on its O neighbour
        assert_eq!(ctx[0].r1_root, Substituent::Atom(1));
        assert_eq!(ctx[0].r2_root, Substituent::Atom(6));
    }

    #[test]
    fn no_diazo() {
        assert!(find_diazo(&parse_smiles("CCO").unwrap()).is_empty());
        // azide is not a diazo
        assert!(find_diazo(&parse_smiles("CN=[N+]=[N-]").unwrap()).is_empty());
    }

    #[test]
    fn figure_molecule_domains() {
        let m = parse_smiles(FIG4).unwrap();
        let ctx = find_diazo(&m);
        assert_eq!(ctx.len(), 1);
        assert_eq!(ctx[0].r1_root, Substituent::Atom(2));
        assert_eq!(ctx[0].r2_root, Substituent::Atom(7));
        let (r1, r2) = assign_domains(&ctx[0], &m);
        assert_eq!((r1, r2), (Substituent::Atom(2), Substituent::Atom(7)));
    }

    #[test]
    fn acyl_chloride_with_one_h() {
        let m = parse_smiles("O=C(Cl)C=[N+]=[N-]").unwrap();
        let ctx = find_diazo(&m);
        assert_eq!(ctx.len(), 1);
        assert_eq!(ctx[0].r1_root, Substituent::Atom(1));
        assert_eq!(ctx[0].r2_root, Substituent::ImplicitH);
    }

    #[test]
    fn alternate_spellings() {
        for s in ["C=N#N", "[CH2-][N+]#N", "CC(=O)C(=N#N)C"] {
            let m = parse_smiles(s).unwrap();
            assert_eq!(find_diazo(&m).len(), 1, "{s}");
        }
        let n = normalize_diazo(&parse_smiles("C=N#N").unwrap());
        assert_eq!(n.atom(1).formal_charge, 1);
        assert_eq!(n.atom(2).formal_charge, -1);
        assert_eq!(n.bond_between(1, 2), Some(BondOrder::Double));
    }

    #[test]
    fn heteroatom_outranks_carbon() {
        // ester linkage by oxygen (Z=8) beats the methyl carbon
        let m = parse_smiles("CC(=[N+]=[N-])OC").unwrap();
        let ctx = find_diazo(&m);
        assert_eq!(ctx[0].r1_root, Substituent::Atom(4));
        assert_eq!(ctx[0].r2_root, Substituent::Atom(0));
    }

    #[test]
    fn bis_diazo() {
        let m = parse_smiles("[N-]=[N+]=C(C(=O)C(=[N+]=[N-])C)C(=O)OC").unwrap();
        let ctx = find_diazo(&m);
        assert_eq!(ctx.len(), 2);
        let primary = primary_context(&ctx, &m).unwrap();
        assert!(ctx.contains(primary));
    }

    #[test]
    fn renumbering_invariance() {
        let a = parse_smiles("CC(=O)C(=[N+]=[N-])C").unwrap();
        let b = parse_smiles("[N-]=[N+]=C(C)C(C)=O").unwrap();
        let ka = find_diazo(&a);
        let kb = find_diazo(&b);
        let el = |m: &Molecule, s: Substituent| s.atom().map(|i| (m.atom(i).element, m.atom(i).explicit_h_count));
        assert_eq!(el(&a, ka[0].r1_root), el(&b, kb[0].r1_root));
        assert_eq!(el(&a, ka[0].r2_root), el(&b, kb[0].r2_root));
        assert_eq!(el(&b, kb[0].r1_root), Some((Element::C, 0)));
    }
}
