#![allow(dead_code)]

use diazoir::{BondOrder, Molecule};

pub struct Entry {
    pub name: String,
    pub smiles: String,
    pub diazo_groups: usize,
}

/// The curated diazo corpus in `tests/data/diazo_corpus.csv`.
pub fn corpus() -> Vec<Entry> {
    let text = include_str!("../data/diazo_corpus.csv");
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            // SMILES never contain commas; names may.
            let mut parts = line.rsplitn(3, ',');
            let groups = parts.next().unwrap().trim().parse().unwrap();
            let smiles = parts.next().unwrap().trim().to_string();
            let name = parts.next().unwrap().trim().trim_matches('"').to_string();
            Entry { name, smiles, diazo_groups: groups }
        })
        .collect()
}

/// Write `m` with its atoms in the order given by `perm` (position -> old index).
/// Every atom is a separate bracketed component and every bond a ring closure,
/// so the parsed result numbers atom `perm[k]` as `k`.
pub fn scrambled(m: &Molecule, perm: &[usize]) -> String {
    let n = m.atom_count();
    let mut pos = vec![0usize; n];
    for (k, &old) in perm.iter().enumerate() {
        pos[old] = k;
    }
    let mut closures: Vec<Vec<(char, usize)>> = vec![Vec::new(); n];
    for (bi, b) in m.bonds().iter().enumerate() {
        let sym = match b.order {
            BondOrder::Single => '-',
            BondOrder::Double => '=',
            BondOrder::Triple => '#',
            BondOrder::Aromatic => ':',
        };
        let digit = 10 + bi;
        assert!(digit < 100, "too many bonds for two-digit closures");
        closures[pos[b.endpoints.0]].push((sym, digit));
        closures[pos[b.endpoints.1]].push((sym, digit));
    }
    let mut parts = Vec::with_capacity(n);
    for (k, &old) in perm.iter().enumerate() {
        let a = m.atom(old);
        let sym = if a.aromatic { a.element.symbol().to_lowercase() } else { a.element.symbol().to_string() };
        let h = match a.explicit_h_count {
            0 => String::new(),
            1 => "H".into(),
            c => format!("H{c}"),
        };
        let charge = match a.formal_charge {
            0 => String::new(),
            1 => "+".into(),
            -1 => "-".into(),
            c if c > 0 => format!("+{c}"),
            c => format!("-{}", -c),
        };
        let mut s = format!("[{sym}{h}{charge}]");
        for &(b, d) in &closures[k] {
            s.push(b);
            s.push_str(&format!("%{d}"));
        }
        parts.push(s);
    }
    parts.join(".")
}
