//! Molecular graph types.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::element::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    pub const ALL: [BondOrder; 4] =
        [BondOrder::Single, BondOrder::Double, BondOrder::Triple, BondOrder::Aromatic];

    /// Bond order times two, so aromatic bonds stay integral (3 = 1.5).
    pub fn twice_order(self) -> u8 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// Contribution to an atom's valence when not aromatic.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    /// Upper-case label used in descriptor names.
    pub fn label(self) -> &'static str {
        match self {
            BondOrder::Single => "SINGLE",
            BondOrder::Double => "DOUBLE",
            BondOrder::Triple => "TRIPLE",
            BondOrder::Aromatic => "AROMATIC",
        }
    }

    pub fn from_label(s: &str) -> Option<BondOrder> {
        BondOrder::ALL.into_iter().find(|b| b.label().eq_ignore_ascii_case(s.trim()))
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    pub(crate) fn smiles_symbol(self) -> char {
        match self {
            BondOrder::Single => '-',
            BondOrder::Double => '=',
            BondOrder::Triple => '#',
            BondOrder::Aromatic => ':',
        }
    }
}

impl fmt::Display for BondOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    /// Hydrogens carried by this atom, implicit ones materialised.
    pub explicit_h_count: u8,
    pub aromatic: bool,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub endpoints: (usize, usize),
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.endpoints.0 == atom {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }

    pub fn touches(&self, atom: usize) -> bool {
        self.endpoints.0 == atom || self.endpoints.1 == atom
    }
}

/// An immutable molecular graph.
#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    source_smiles: String,
    // per atom: (neighbor, bond index)
    adjacency: Vec<Vec<(usize, usize)>>,
    ring_bond: Vec<bool>,
    ring_atom: Vec<bool>,
}

impl Molecule {
    /// Assemble a molecule. Callers guarantee distinct endpoints and no duplicate bonds.
    pub(crate) fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>, source_smiles: String) -> Self {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (bi, b) in bonds.iter().enumerate() {
            adjacency[b.endpoints.0].push((b.endpoints.1, bi));
            adjacency[b.endpoints.1].push((b.endpoints.0, bi));
        }
        let ring_bond = ring_bonds(atoms.len(), &bonds, &adjacency);
        let mut ring_atom = vec![false; atoms.len()];
        for (b, &in_ring) in bonds.iter().zip(&ring_bond) {
            if in_ring {
                ring_atom[b.endpoints.0] = true;
                ring_atom[b.endpoints.1] = true;
            }
        }
        Molecule { atoms, bonds, source_smiles, adjacency, ring_bond, ring_atom }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn source_smiles(&self) -> &str {
        &self.source_smiles
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Neighbours of `atom` with the connecting bond order, in bond insertion order.
    pub fn neighbors(&self, atom: usize) -> impl Iterator<Item = (usize, BondOrder)> + '_ {
        self.adjacency[atom].iter().map(move |&(n, b)| (n, self.bonds[b].order))
    }

    /// Number of explicit (graph) neighbours.
    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<BondOrder> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, bi)| self.bonds[bi].order)
    }

    pub fn is_ring_atom(&self, atom: usize) -> bool {
        self.ring_atom[atom]
    }

    pub fn is_ring_bond(&self, bond: usize) -> bool {
        self.ring_bond[bond]
    }

    /// Number of independent rings (cycle rank), the size of any SSSR.
    pub fn ring_count(&self) -> usize {
        let components = self.components().len();
        (self.bonds.len() + components).saturating_sub(self.atoms.len())
    }

    /// Connected components as sorted atom index lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(a) = stack.pop() {
                comp.push(a);
                for &(n, _) in &self.adjacency[a] {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Copy with atom and bond attributes replaced; the topology is unchanged.
    pub(crate) fn with_edits(
        &self,
        edit_atoms: impl FnOnce(&mut [Atom]),
        edit_bonds: impl FnOnce(&mut [Bond]),
    ) -> Molecule {
        let mut atoms = self.atoms.clone();
        let mut bonds = self.bonds.clone();
        edit_atoms(&mut atoms);
        edit_bonds(&mut bonds);
        Molecule {
            atoms,
            bonds,
            source_smiles: self.source_smiles.clone(),
            adjacency: self.adjacency.clone(),
            ring_bond: self.ring_bond.clone(),
            ring_atom: self.ring_atom.clone(),
        }
    }
}

/// Marks every bond lying on a cycle, i.e. every bond that is not a bridge.
fn ring_bonds(n: usize, bonds: &[Bond], adjacency: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; bonds.len()];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // iterative DFS: (node, parent bond, next adjacency slot)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, pb, ref mut slot)) = stack.last_mut() {
            if *slot < adjacency[u].len() {
                let (v, bi) = adjacency[u][*slot];
                *slot += 1;
                if bi == pb {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, bi, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        is_bridge[pb] = true;
                    }
                }
            }
        }
    }
    is_bridge.into_iter().map(|b| !b).collect()
}
