//! SMILES reading and a bracket-only debugging writer.
//!
//! Supported: organic-subset atoms, bracket atoms with isotope, chirality,
//! hydrogen count, charge and atom class, branches, ring closures (single
//! digits and `%nn`), the bond symbols `- = # :` plus `/ \`, dot-separated
//! components and lowercase aromatic `b c n o p s`. Isotopes, chirality and
//! directional bonds are read and dropped.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::canon::canonical_atom_order;
use crate::element::Element;
use crate::molecule::{Atom, Bond, BondOrder, Molecule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("empty SMILES string")]
    Empty,
    #[error("non-ASCII character at position {0}")]
    NonAscii(usize),
    #[error("unbalanced bracket or parenthesis at position {0}")]
    UnbalancedBracket(usize),
    #[error("ring closure {0} is never closed")]
    UnmatchedRingClosure(u32),
    #[error("conflicting bond symbols on ring closure {0}")]
    RingBondConflict(u32),
    #[error("unknown element `{symbol}` at position {pos}")]
    UnknownElement { symbol: String, pos: usize },
    #[error("valence violation on atom {atom} ({symbol}): bond order sum {used} exceeds allowed")]
    ValenceViolation { atom: usize, symbol: String, used: u8 },
    #[error("unexpected character `{ch}` at position {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("atom {0} is aromatic but not in a ring")]
    AromaticOutsideRing(usize),
}

const ALL_SYMBOLS: &[&str] = &[
    "He", "Li", "Be", "Ne", "Na", "Mg", "Al", "Ar", "Ca", "Sc", "Ti", "Cr", "Mn", "Fe", "Co",
    "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Kr", "Rb", "Sr", "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "Re", "Os",
    "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa",
    "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Si", "Cl", "Br",
];

#[derive(Debug)]
struct RawAtom {
    element: Element,
    charge: i8,
    /// `Some` for bracket atoms.
    hcount: Option<u8>,
    aromatic: bool,
}

#[derive(Debug)]
struct RawBond {
    a: usize,
    b: usize,
    order: Option<BondOrder>,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<RawBond>,
    rings: BTreeMap<u32, (usize, Option<BondOrder>)>,
}

/// Parse a SMILES string into a validated molecular graph.
pub fn parse_smiles(smiles: &str) -> Result<Molecule, SmilesError> {
    if let Some(p) = smiles.bytes().position(|c| !c.is_ascii()) {
        return Err(SmilesError::NonAscii(p));
    }
    // anything after the first whitespace is a name field
    let body = smiles.trim_start().split_ascii_whitespace().next().unwrap_or("");
    if body.is_empty() {
        return Err(SmilesError::Empty);
    }
    let mut p = Parser { s: body.as_bytes(), pos: 0, atoms: Vec::new(), bonds: Vec::new(), rings: BTreeMap::new() };
    p.run()?;
    p.finish(smiles)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn unexpected(&self) -> SmilesError {
        match self.peek() {
            Some(c) => SmilesError::UnexpectedChar { ch: c as char, pos: self.pos },
            None => SmilesError::UnexpectedEnd,
        }
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<BondOrder> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    let Some(at) = prev else { return Err(self.unexpected()) };
                    if pending.is_some() {
                        return Err(self.unexpected());
                    }
                    branches.push((at, self.pos));
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(self.unexpected());
                    }
                    let (at, _) = branches.pop().ok_or(SmilesError::UnbalancedBracket(self.pos))?;
                    prev = Some(at);
                    self.pos += 1;
                }
                b'-' | b'/' | b'\\' | b'=' | b'#' | b':' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.unexpected());
                    }
                    pending = Some(match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    });
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.unexpected());
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(at) = prev else { return Err(self.unexpected()) };
                    let num = self.ring_number()?;
                    self.ring_closure(at, num, pending.take())?;
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    let idx = self.push_atom(atom);
                    if let Some(p) = prev {
                        self.bonds.push(RawBond { a: p, b: idx, order: pending.take() });
                    }
                    prev = Some(idx);
                }
                b']' => return Err(SmilesError::UnbalancedBracket(self.pos)),
                _ => {
                    let atom = self.organic_atom()?;
                    let idx = self.push_atom(atom);
                    if let Some(p) = prev {
                        self.bonds.push(RawBond { a: p, b: idx, order: pending.take() });
                    }
                    prev = Some(idx);
                }
            }
        }
        if pending.is_some() {
            return Err(SmilesError::UnexpectedEnd);
        }
        if let Some(&(_, pos)) = branches.last() {
            return Err(SmilesError::UnbalancedBracket(pos));
        }
        if let Some((&num, _)) = self.rings.iter().next() {
            return Err(SmilesError::UnmatchedRingClosure(num));
        }
        Ok(())
    }

    fn push_atom(&mut self, atom: RawAtom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    fn ring_number(&mut self) -> Result<u32, SmilesError> {
        let c = self.peek().ok_or(SmilesError::UnexpectedEnd)?;
        if c == b'%' {
            self.pos += 1;
            let mut n = 0u32;
            for _ in 0..2 {
                match self.peek() {
                    Some(d @ b'0'..=b'9') => {
                        n = n * 10 + (d - b'0') as u32;
                        self.pos += 1;
                    }
                    _ => return Err(self.unexpected()),
                }
            }
            Ok(n)
        } else {
            self.pos += 1;
            Ok((c - b'0') as u32)
        }
    }

    fn ring_closure(&mut self, at: usize, num: u32, order: Option<BondOrder>) -> Result<(), SmilesError> {
        match self.rings.remove(&num) {
            None => {
                self.rings.insert(num, (at, order));
                Ok(())
            }
            Some((open, open_order)) => {
                let order = match (open_order, order) {
                    (Some(a), Some(b)) if a != b => return Err(SmilesError::RingBondConflict(num)),
                    (a, b) => a.or(b),
                };
                if open == at {
                    return Err(SmilesError::DuplicateBond(at, at));
                }
                self.bonds.push(RawBond { a: open, b: at, order });
                Ok(())
            }
        }
    }

    fn organic_atom(&mut self) -> Result<RawAtom, SmilesError> {
        let start = self.pos;
        let c = self.peek().ok_or(SmilesError::UnexpectedEnd)?;
        let next = self.s.get(self.pos + 1).copied();
        let (element, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => (Element::Cl, false, 2),
            (b'B', Some(b'r')) => (Element::Br, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            (c, _) if c.is_ascii_alphabetic() => {
                let mut sym = (c as char).to_string();
                if let Some(n) = next.filter(u8::is_ascii_lowercase) {
                    sym.push(n as char);
                }
                return Err(SmilesError::UnknownElement { symbol: sym, pos: start });
            }
            _ => return Err(self.unexpected()),
        };
        self.pos += len;
        Ok(RawAtom { element, charge: 0, hcount: None, aromatic })
    }

    fn bracket_atom(&mut self) -> Result<RawAtom, SmilesError> {
        let open = self.pos;
        self.pos += 1;
        let unclosed = SmilesError::UnbalancedBracket(open);
        // isotope
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let start = self.pos;
        let c = self.peek().ok_or(unclosed.clone())?;
        let next = self.s.get(self.pos + 1).copied();
        let (element, aromatic) = if c.is_ascii_lowercase() {
            let e = match c {
                b'b' => Element::B,
                b'c' => Element::C,
                b'n' => Element::N,
                b'o' => Element::O,
                b'p' => Element::P,
                b's' => Element::S,
                _ => {
                    let mut sym = (c as char).to_string();
                    if let Some(n) = next.filter(u8::is_ascii_lowercase) {
                        sym.push(n as char);
                    }
                    return Err(SmilesError::UnknownElement { symbol: sym, pos: start });
                }
            };
            if next.is_some_and(|n| n.is_ascii_lowercase()) {
                let sym: String = [c as char, next.unwrap() as char].iter().collect();
                return Err(SmilesError::UnknownElement { symbol: sym, pos: start });
            }
            self.pos += 1;
            (e, true)
        } else if c.is_ascii_uppercase() {
            let two = next.filter(u8::is_ascii_lowercase).map(|n| {
                let mut s = (c as char).to_string();
                s.push(n as char);
                s
            });
            match two {
                Some(sym) if ALL_SYMBOLS.contains(&sym.as_str()) => {
                    let e = Element::from_symbol(&sym)
                        .ok_or_else(|| SmilesError::UnknownElement { symbol: sym.clone(), pos: start })?;
                    self.pos += 2;
                    (e, false)
                }
                _ => {
                    let sym = (c as char).to_string();
                    let e = Element::from_symbol(&sym)
                        .ok_or(SmilesError::UnknownElement { symbol: sym, pos: start })?;
                    self.pos += 1;
                    (e, false)
                }
            }
        } else {
            return Err(self.unexpected());
        };
        // chirality: @, @@, @TH1, @SP2, @OH12 ...
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            }
            let tag = self.s.get(self.pos..self.pos + 2);
            if matches!(tag, Some(b"TH" | b"AL" | b"SP" | b"TB" | b"OH")) {
                self.pos += 2;
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.pos += 1;
                }
            }
        }
        let mut hcount = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hcount = 1;
            if let Some(d @ b'0'..=b'9') = self.peek() {
                hcount = d - b'0';
                self.pos += 1;
            }
        }
        let mut charge: i8 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit: i8 = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            charge = unit;
            if let Some(d @ b'0'..=b'9') = self.peek() {
                charge = unit * (d - b'0') as i8;
                self.pos += 1;
            } else {
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
        }
        if self.peek() == Some(b':') {
            self.pos += 1;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        match self.peek() {
            Some(b']') => {
                self.pos += 1;
                Ok(RawAtom { element, charge, hcount: Some(hcount), aromatic })
            }
            None => Err(unclosed),
            Some(_) => Err(self.unexpected()),
        }
    }

    fn finish(self, source: &str) -> Result<Molecule, SmilesError> {
        let Parser { atoms: raw_atoms, bonds: raw_bonds, .. } = self;
        let mut seen = std::collections::BTreeSet::new();
        let mut bonds = Vec::with_capacity(raw_bonds.len());
        let mut explicit = Vec::with_capacity(raw_bonds.len());
        for rb in &raw_bonds {
            let key = (rb.a.min(rb.b), rb.a.max(rb.b));
            if rb.a == rb.b || !seen.insert(key) {
                return Err(SmilesError::DuplicateBond(key.0, key.1));
            }
            let order = rb.order.unwrap_or(
                if raw_atoms[rb.a].aromatic && raw_atoms[rb.b].aromatic {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                },
            );
            bonds.push(Bond { endpoints: (rb.a, rb.b), order });
            explicit.push(rb.order.is_some());
        }
        let atoms: Vec<Atom> = raw_atoms
            .iter()
            .enumerate()
            .map(|(i, r)| Atom {
                element: r.element,
                formal_charge: r.charge,
                explicit_h_count: r.hcount.unwrap_or(0),
                aromatic: r.aromatic,
                index: i,
            })
            .collect();
        // ring perception needs the assembled graph
        let mol = Molecule::from_parts(atoms, bonds, source.to_string());
        let mut bonds = mol.bonds().to_vec();
        for (bi, b) in bonds.iter_mut().enumerate() {
            if b.order == BondOrder::Aromatic && !mol.is_ring_bond(bi) {
                if explicit[bi] {
                    return Err(SmilesError::AromaticOutsideRing(b.endpoints.0));
                }
                b.order = BondOrder::Single;
            }
        }
        for a in mol.atoms() {
            if a.aromatic && !mol.is_ring_atom(a.index) {
                return Err(SmilesError::AromaticOutsideRing(a.index));
            }
        }
        let mut atoms = mol.atoms().to_vec();
        for atom in atoms.iter_mut() {
            let i = atom.index;
            let mut base = 0u8;
            let mut exo_double = false;
            for b in bonds.iter().filter(|b| b.touches(i)) {
                base += b.order.valence();
                if b.order == BondOrder::Double || b.order == BondOrder::Triple {
                    exo_double = true;
                }
            }
            let bracket = raw_atoms[i].hcount;
            base += bracket.unwrap_or(0);
            let allowed = atom.element.allowed_valences(atom.formal_charge);
            let min_valence = allowed[0];
            let pi = u8::from(atom.aromatic && !exo_double && base < min_valence);
            let used = base + pi;
            let violation = || SmilesError::ValenceViolation {
                atom: i,
                symbol: atom.element.symbol().to_string(),
                used,
            };
            let target = allowed.iter().copied().find(|&v| v >= used).ok_or_else(violation)?;
            if bracket.is_none() {
                atom.explicit_h_count = target - used;
            }
        }
        Ok(Molecule::from_parts(atoms, bonds, source.to_string()))
    }
}

/// Serialise a molecule with every atom bracketed and every bond explicit.
///
/// Intended for debugging and round-trip checks; atoms are visited in
/// canonical order so the output does not depend on input numbering.
pub fn write_smiles(m: &Molecule) -> String {
    let order = canonical_atom_order(m);
    let mut rank = vec![0usize; m.atom_count()];
    for (r, &a) in order.iter().enumerate() {
        rank[a] = r;
    }
    let n = m.atom_count();
    let mut sorted_nbrs: Vec<Vec<(usize, BondOrder)>> = (0..n)
        .map(|a| {
            let mut v: Vec<_> = m.neighbors(a).collect();
            v.sort_by_key(|&(nb, _)| rank[nb]);
            v
        })
        .collect();

    // DFS pass: tree children and ring-closure edges per atom
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<(usize, BondOrder)>> = vec![Vec::new(); n];
    let mut closures: Vec<Vec<(usize, BondOrder)>> = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for &start in &order {
        if visited[start] {
            continue;
        }
        roots.push(start);
        dfs_plan(start, usize::MAX, &mut sorted_nbrs, &mut visited, &mut children, &mut closures);
    }

    let mut out = String::new();
    let mut digits: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut free: Vec<bool> = vec![true; 100];
    for (ci, &root) in roots.iter().enumerate() {
        if ci > 0 {
            out.push('.');
        }
        emit(root, m, &children, &closures, &mut digits, &mut free, &mut out);
    }
    out
}

fn dfs_plan(
    u: usize,
    parent: usize,
    nbrs: &mut [Vec<(usize, BondOrder)>],
    visited: &mut [bool],
    children: &mut [Vec<(usize, BondOrder)>],
    closures: &mut [Vec<(usize, BondOrder)>],
) {
    visited[u] = true;
    let list = nbrs[u].clone();
    for (v, order) in list {
        if v == parent {
            continue;
        }
        if visited[v] {
            // back edge seen from the descendant; record once
            if !closures[v].iter().any(|&(w, _)| w == u) {
                closures[u].push((v, order));
                closures[v].push((u, order));
            }
        } else {
            children[u].push((v, order));
            dfs_plan(v, u, nbrs, visited, children, closures);
        }
    }
}

fn emit(
    u: usize,
    m: &Molecule,
    children: &[Vec<(usize, BondOrder)>],
    closures: &[Vec<(usize, BondOrder)>],
    digits: &mut BTreeMap<(usize, usize), u32>,
    free: &mut [bool],
    out: &mut String,
) {
    let a = m.atom(u);
    out.push('[');
    if a.aromatic {
        out.push_str(&a.element.symbol().to_ascii_lowercase());
    } else {
        out.push_str(a.element.symbol());
    }
    if a.explicit_h_count > 0 {
        out.push('H');
        if a.explicit_h_count > 1 {
            out.push_str(&a.explicit_h_count.to_string());
        }
    }
    match a.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => out.push_str(&format!("+{c}")),
        c => out.push_str(&format!("-{}", -c)),
    }
    out.push(']');
    for &(v, order) in &closures[u] {
        let key = (u.min(v), u.max(v));
        let digit = match digits.remove(&key) {
            Some(d) => {
                free[d as usize] = true;
                d
            }
            None => {
                let d = (1..free.len()).find(|&d| free[d]).expect("too many open rings") as u32;
                free[d as usize] = false;
                digits.insert(key, d);
                out.push(order.smiles_symbol());
                d
            }
        };
        if digit < 10 {
            out.push_str(&digit.to_string());
        } else {
            out.push_str(&format!("%{digit:02}"));
        }
    }
    let kids = &children[u];
    for (k, &(v, order)) in kids.iter().enumerate() {
        let last = k + 1 == kids.len();
        if !last {
            out.push('(');
        }
        out.push(order.smiles_symbol());
        emit(v, m, children, closures, digits, free, out);
        if !last {
            out.push(')');
        }
    }
}
