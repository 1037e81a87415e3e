//! The twelve non-metal and metalloid elements the descriptor understands,
//! backed by an embedded property table.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const TABLE_SRC: &str = include_str!("../data/elements.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    H,
    B,
    C,
    N,
    O,
    F,
    Si,
    P,
    S,
    Cl,
    Br,
    I,
}

#[derive(Debug, Clone)]
pub struct ElementProps {
    pub symbol: &'static str,
    pub atomic_number: u8,
    pub electronegativity: f64,
    pub covalent_radius: f64,
    pub valence_electrons: u8,
    pub period: u8,
    pub default_valences: Vec<u8>,
}

impl Element {
    /// All supported elements, in atomic-number order.
    pub const ALL: [Element; 12] = [
        Element::H,
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::Si,
        Element::P,
        Element::S,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn props(self) -> &'static ElementProps {
        &table()[self.slot()]
    }

    pub fn symbol(self) -> &'static str {
        self.props().symbol
    }

    pub fn atomic_number(self) -> u8 {
        self.props().atomic_number
    }

    /// Pauling electronegativity.
    pub fn electronegativity(self) -> f64 {
        self.props().electronegativity
    }

    /// Single-bond covalent radius in picometres.
    pub fn covalent_radius(self) -> f64 {
        self.props().covalent_radius
    }

    pub fn from_symbol(sym: &str) -> Option<Element> {
        Element::ALL.iter().copied().find(|e| e.symbol() == sym)
    }

    /// Valences permitted for this element at the given formal charge, ascending.
    ///
    /// A charged atom takes the valence list of the neutral atom with the same
    /// number of valence electrons; second-row atoms are held to the octet.
    pub fn allowed_valences(self, charge: i8) -> Vec<u8> {
        let p = self.props();
        if charge == 0 {
            return p.default_valences.clone();
        }
        let v = p.valence_electrons as i16 - charge as i16;
        if self == Element::H {
            return if v == 1 { vec![1] } else { vec![0] };
        }
        if !(1..=7).contains(&v) {
            return vec![0];
        }
        let v = v as u8;
        if p.period <= 2 || v <= 4 {
            vec![if v <= 4 { v } else { 8 - v }]
        } else {
            // expanded octet for third-row and heavier atoms
            (8 - v..=v).step_by(2).collect()
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSymbol(pub String);

impl fmt::Display for UnknownSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown element symbol `{}`", self.0)
    }
}

impl std::error::Error for UnknownSymbol {}

impl FromStr for Element {
    type Err = UnknownSymbol;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Element::ALL
            .iter()
            .copied()
            .find(|e| e.symbol().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownSymbol(s.to_string()))
    }
}

fn table() -> &'static [ElementProps] {
    static TABLE: OnceLock<Vec<ElementProps>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<ElementProps> = TABLE_SRC
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(parse_row)
            .collect();
        rows.sort_by_key(|r| r.atomic_number);
        assert_eq!(rows.len(), Element::ALL.len(), "element table must list 12 elements");
        for (row, e) in rows.iter().zip(Element::ALL) {
            assert_eq!(row.symbol, format!("{e:?}"), "element table out of order");
        }
        rows
    })
}

fn parse_row(line: &'static str) -> ElementProps {
    let cols: Vec<&'static str> = line.split('\t').collect();
    assert_eq!(cols.len(), 7, "malformed element table row: {line}");
    ElementProps {
        symbol: cols[0],
        atomic_number: cols[1].parse().expect("atomic number"),
        electronegativity: cols[2].parse().expect("electronegativity"),
        covalent_radius: cols[3].parse().expect("covalent radius"),
        valence_electrons: cols[4].parse().expect("valence electrons"),
        period: cols[5].parse().expect("period"),
        default_valences: cols[6].split(',').map(|v| v.parse().expect("valence")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_invariants() {
        for e in Element::ALL {
            assert!(e.covalent_radius() > 0.0);
            let en = e.electronegativity();
            assert!(en > 0.5 && en < 4.5, "{e}: {en}");
        }
        let symbols: Vec<_> = Element::ALL.iter().map(|e| e.symbol()).collect();
        let mut expected = vec!["I", "Br", "Cl", "S", "P", "Si", "F", "O", "C", "N", "B", "H"];
        expected.sort_unstable();
        let mut got = symbols.clone();
        got.sort_unstable();
        assert_eq!(got, expected);
    }

    #[test]
    fn radii_from_source() {
        let radii = [
            (Element::H, 37.0),
            (Element::B, 82.0),
            (Element::C, 77.0),
            (Element::N, 75.0),
            (Element::O, 73.0),
            (Element::Si, 111.0),
            (Element::P, 106.0),
            (Element::S, 102.0),
        ];
        for (e, r) in radii {
            assert_eq!(e.covalent_radius(), r, "{e}");
        }
    }

    #[test]
    fn charged_valences() {
        assert_eq!(Element::N.allowed_valences(1), vec![4]);
        assert_eq!(Element::N.allowed_valences(-1), vec![2]);
        assert_eq!(Element::O.allowed_valences(-1), vec![1]);
        assert_eq!(Element::O.allowed_valences(1), vec![3]);
        assert_eq!(Element::C.allowed_valences(-1), vec![3]);
        assert_eq!(Element::B.allowed_valences(-1), vec![4]);
        assert_eq!(Element::S.allowed_valences(1), vec![3, 5]);
        assert_eq!(Element::P.allowed_valences(1), vec![4]);
        assert_eq!(Element::H.allowed_valences(1), vec![0]);
    }

    #[test]
    fn symbol_lookup() {
        assert_eq!("cl".parse::<Element>().unwrap(), Element::Cl);
        assert_eq!(Element::from_symbol("Si"), Some(Element::Si));
        assert!("Fe".parse::<Element>().is_err());
    }
}
