//! Structural attention descriptor: properties of the two atoms bonded to
//! the diazo carbon plus a tally of what each of them is bonded to.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diazo::{DiazoContext, Substituent};
use crate::element::Element;
use crate::molecule::{BondOrder, Molecule};

#[derive(Debug, Error)]
pub enum ComboTableError {
    #[error("line {line}: expected `ELEMENT BONDTYPE`, found `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown element `{symbol}`")]
    UnknownElement { line: usize, symbol: String },
    #[error("line {line}: unknown bond type `{bond}`")]
    UnknownBond { line: usize, bond: String },
    #[error("line {line}: duplicate entry {element} {bond}")]
    Duplicate { line: usize, element: Element, bond: BondOrder },
    #[error("line {line}: hydrogen only forms single bonds")]
    HydrogenMultiple { line: usize },
    #[error("combo table is empty")]
    Empty,
    #[error("reading combo table: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamdError {
    #[error("diazo context is malformed: {0}")]
    DomainMissing(String),
}

/// The (element, bond type) pairs tallied per domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComboTable {
    entries: Vec<(Element, BondOrder)>,
    version: String,
}

impl ComboTable {
    pub fn new(entries: Vec<(Element, BondOrder)>, version: impl Into<String>) -> Result<Self, ComboTableError> {
        if entries.is_empty() {
            return Err(ComboTableError::Empty);
        }
        for (i, &(e, b)) in entries.iter().enumerate() {
            if e == Element::H && b != BondOrder::Single {
                return Err(ComboTableError::HydrogenMultiple { line: i + 1 });
            }
            if entries[..i].contains(&(e, b)) {
                return Err(ComboTableError::Duplicate { line: i + 1, element: e, bond: b });
            }
        }
        Ok(ComboTable { entries, version: version.into() })
    }

    /// Single bonds to all twelve elements, double to C/N/O/S, triple to C/N.
    pub fn default_table() -> Self {
        let mut entries: Vec<(Element, BondOrder)> =
            Element::ALL.iter().map(|&e| (e, BondOrder::Single)).collect();
        entries.extend([Element::C, Element::N, Element::O, Element::S].map(|e| (e, BondOrder::Double)));
        entries.extend([Element::C, Element::N].map(|e| (e, BondOrder::Triple)));
        ComboTable { entries, version: "default-v1".into() }
    }

    /// The default table plus aromatic bonds to C/N/O/S.
    pub fn extended_table() -> Self {
        let mut t = Self::default_table();
        t.entries.extend([Element::C, Element::N, Element::O, Element::S].map(|e| (e, BondOrder::Aromatic)));
        t.version = "extended-v1".into();
        t
    }

    /// Parse a table from text, one `ELEMENT BONDTYPE` pair per line. Blank
    /// lines and `#` comments are ignored.
    pub fn parse(text: &str, version: impl Into<String>) -> Result<Self, ComboTableError> {
        let mut entries = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let parts: Vec<&str> = body.split_whitespace().collect();
            let [sym, bond] = parts[..] else {
                return Err(ComboTableError::Malformed { line, text: raw.to_string() });
            };
            let e: Element =
                sym.parse().map_err(|_| ComboTableError::UnknownElement { line, symbol: sym.to_string() })?;
            let b = BondOrder::from_label(bond).ok_or_else(|| ComboTableError::UnknownBond { line, bond: bond.to_string() })?;
            if e == Element::H && b != BondOrder::Single {
                return Err(ComboTableError::HydrogenMultiple { line });
            }
            if entries.contains(&(e, b)) {
                return Err(ComboTableError::Duplicate { line, element: e, bond: b });
            }
            entries.push((e, b));
        }
        if entries.is_empty() {
            return Err(ComboTableError::Empty);
        }
        Ok(ComboTable { entries, version: version.into() })
    }

    pub fn load(path: &Path) -> Result<Self, ComboTableError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, format!("file:{}", path.display()))
    }

    /// Render in the file format accepted by [`ComboTable::parse`].
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(e, b)| format!("{} {}\n", e.symbol(), b.label())).collect()
    }

    pub fn entries(&self) -> &[(Element, BondOrder)] {
        &self.entries
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, e: Element, b: BondOrder) -> bool {
        self.entries.contains(&(e, b))
    }

    fn position(&self, e: Element, b: BondOrder) -> Option<usize> {
        self.entries.iter().position(|&x| x == (e, b))
    }

    /// Feature names in column order: R1 block then R2 block, each starting
    /// with electronegativity and covalent radius.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(2 * (self.entries.len() + 2));
        for d in Domain::BOTH {
            names.push(format!("electronegativity_{d}"));
            names.push(format!("covalent_radius_{d}"));
            for (e, b) in &self.entries {
                names.push(format!("{}_{}_{d}", e.symbol().to_ascii_uppercase(), b.label()));
            }
        }
        names
    }

    /// Width of the descriptor block.
    pub fn feature_count(&self) -> usize {
        2 * (self.entries.len() + 2)
    }
}

impl Default for ComboTable {
    fn default() -> Self {
        Self::default_table()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    R1,
    R2,
}

impl Domain {
    pub const BOTH: [Domain; 2] = [Domain::R1, Domain::R2];
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::R1 => "R1",
            Domain::R2 => "R2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFeatures {
    pub electronegativity: f64,
    /// pm
    pub covalent_radius: f64,
    /// One count per combo table entry, in table order.
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamdVector {
    pub r1: DomainFeatures,
    pub r2: DomainFeatures,
}

impl SamdVector {
    pub fn domain(&self, d: Domain) -> &DomainFeatures {
        match d {
            Domain::R1 => &self.r1,
            Domain::R2 => &self.r2,
        }
    }

    /// Flattened values aligned with [`ComboTable::feature_names`].
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * (self.r1.counts.len() + 2));
        for d in [&self.r1, &self.r2] {
            v.push(d.electronegativity);
            v.push(d.covalent_radius);
            v.extend(d.counts.iter().map(|&c| c as f64));
        }
        v
    }

    /// Look up a count by element, bond type and domain. `None` when the pair is not in `table`.
    pub fn count(&self, table: &ComboTable, e: Element, b: BondOrder, d: Domain) -> Option<u32> {
        table.position(e, b).map(|i| self.domain(d).counts[i])
    }
}

fn domain_features(
    root: Substituent,
    diazo_carbon: usize,
    m: &Molecule,
    table: &ComboTable,
) -> Result<DomainFeatures, SamdError> {
    let mut counts = vec![0u32; table.len()];
    let Some(i) = root.atom() else {
        return Ok(DomainFeatures {
            electronegativity: Element::H.electronegativity(),
            covalent_radius: Element::H.covalent_radius(),
            counts,
        });
    };
    if i >= m.atom_count() {
        return Err(SamdError::DomainMissing(format!("root atom {i} out of range")));
    }
    if m.bond_between(i, diazo_carbon).is_none() {
        return Err(SamdError::DomainMissing(format!("root atom {i} is not bonded to the diazo carbon")));
    }
    let atom = m.atom(i);
    for (n, order) in m.neighbors(i) {
        if n == diazo_carbon {
            continue;
        }
        if let Some(k) = table.position(m.atom(n).element, order) {
            counts[k] += 1;
        }
    }
    if let Some(k) = table.position(Element::H, BondOrder::Single) {
        counts[k] += atom.explicit_h_count as u32;
    }
    Ok(DomainFeatures {
        electronegativity: atom.element.electronegativity(),
        covalent_radius: atom.element.covalent_radius(),
        counts,
    })
}

/// Compute the descriptor for one diazo context.
pub fn featurize_samd(ctx: &DiazoContext, m: &Molecule, table: &ComboTable) -> Result<SamdVector, SamdError> {
    let c = ctx.diazo_carbon;
    if c >= m.atom_count() {
        return Err(SamdError::DomainMissing(format!("diazo carbon {c} out of range")));
    }
    if ctx.r1_root != Substituent::ImplicitH && ctx.r1_root == ctx.r2_root {
        return Err(SamdError::DomainMissing("R1 and R2 share a root".into()));
    }
    Ok(SamdVector {
        r1: domain_features(ctx.r1_root, c, m, table)?,
        r2: domain_features(ctx.r2_root, c, m, table)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diazo::find_diazo;
    use crate::smiles::parse_smiles;
    use Element::*;

    fn samd(s: &str) -> (SamdVector, ComboTable) {
        let m = parse_smiles(s).unwrap();
        let ctx = find_diazo(&m);
        let t = ComboTable::default_table();
        (featurize_samd(&ctx[0], &m, &t).unwrap(), t)
    }

    #[test]
    fn default_table_shape() {
        let t = ComboTable::default_table();
        assert_eq!(t.len(), 18);
        assert!(t.contains(N, BondOrder::Triple));
        assert!(!t.contains(H, BondOrder::Double));
        assert_eq!(t.feature_count(), 40);
        assert_eq!(t.feature_names().len(), 40);
        assert_eq!(ComboTable::extended_table().len(), 22);
    }

    #[test]
    fn feature_names_order() {
        let names = ComboTable::default_table().feature_names();
        assert_eq!(names[0], "electronegativity_R1");
        assert_eq!(names[1], "covalent_radius_R1");
        assert_eq!(names[2], "H_SINGLE_R1");
        assert_eq!(names[20], "electronegativity_R2");
        assert!(names.contains(&"O_DOUBLE_R2".to_string()));
        assert!(names.contains(&"N_TRIPLE_R2".to_string()));
        assert!(names.contains(&"SI_SINGLE_R1".to_string()));
    }

    #[test]
    fn figure_molecule() {
        let (v, t) = samd("COC(=O)C(=[N+]=[N-])C/C=C/c1ccc(OC)cc1");
        let c = |e, b, d| v.count(&t, e, b, d).unwrap();
        assert_eq!(c(O, BondOrder::Double, Domain::R1), 1);
        assert_eq!(c(O, BondOrder::Single, Domain::R1), 1);
        assert_eq!(c(H, BondOrder::Single, Domain::R2), 2);
        assert_eq!(c(N, BondOrder::Triple, Domain::R2), 0);
        assert_eq!(c(O, BondOrder::Single, Domain::R2), 0);
        assert_eq!(c(O, BondOrder::Double, Domain::R2), 0);
        assert_eq!(v.r2.covalent_radius, 77.0);
    }

    #[test]
    fn diazomethane_all_hydrogen() {
        let (v, _) = samd("C=[N+]=[N-]");
        for d in [&v.r1, &v.r2] {
            assert_eq!(d.electronegativity, 2.20);
            assert_eq!(d.covalent_radius, 37.0);
            assert!(d.counts.iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn acetyl_methyl_counts() {
        let (v, t) = samd("CC(=O)C(=[N+]=[N-])C");
        let c = |e, b, d| v.count(&t, e, b, d).unwrap();
        assert_eq!(c(O, BondOrder::Double, Domain::R1), 1);
        assert_eq!(c(C, BondOrder::Single, Domain::R1), 1);
        assert_eq!(v.r1.counts.iter().sum::<u32>(), 2);
        assert_eq!(c(H, BondOrder::Single, Domain::R2), 3);
        assert_eq!(v.r2.counts.iter().sum::<u32>(), 3);
    }

    #[test]
    fn aromatic_root_needs_extended_table() {
        let s = "c1ccccc1C(=[N+]=[N-])C(=O)OC";
        let m = parse_smiles(s).unwrap();
        let ctx = find_diazo(&m);
        let def = featurize_samd(&ctx[0], &m, &ComboTable::default_table()).unwrap();
        let ext_t = ComboTable::extended_table();
        let ext = featurize_samd(&ctx[0], &m, &ext_t).unwrap();
        let aryl = if def.r1.counts.iter().sum::<u32>() == 0 { Domain::R1 } else { Domain::R2 };
        assert_eq!(def.domain(aryl).counts.iter().sum::<u32>(), 0);
        assert_eq!(ext.count(&ext_t, C, BondOrder::Aromatic, aryl), Some(2));
    }

    #[test]
    fn table_file_parsing() {
        let t = ComboTable::parse("# custom\nO DOUBLE\nh single\n\nN triple # nitrile\n", "t").unwrap();
        assert_eq!(t.entries(), &[(O, BondOrder::Double), (H, BondOrder::Single), (N, BondOrder::Triple)]);
        let round = ComboTable::parse(&ComboTable::default_table().to_text(), "x").unwrap();
        assert_eq!(round.entries(), ComboTable::default_table().entries());
        assert!(matches!(ComboTable::parse("H DOUBLE", "t"), Err(ComboTableError::HydrogenMultiple { line: 1 })));
        assert!(matches!(ComboTable::parse("O SINGLE\nO single", "t"), Err(ComboTableError::Duplicate { line: 2, .. })));
        assert!(matches!(ComboTable::parse("Fe SINGLE", "t"), Err(ComboTableError::UnknownElement { .. })));
        assert!(matches!(ComboTable::parse("O QUADRUPLE", "t"), Err(ComboTableError::UnknownBond { .. })));
        assert!(matches!(ComboTable::parse("O", "t"), Err(ComboTableError::Malformed { .. })));
        assert!(matches!(ComboTable::parse("# nothing", "t"), Err(ComboTableError::Empty)));
    }

    #[test]
    fn malformed_context() {
        let m = parse_smiles("CC(=O)C(=[N+]=[N-])C").unwrap();
        let mut ctx = find_diazo(&m).remove(0);
        ctx.r2_root = Substituent::Atom(0);
        assert!(matches!(featurize_samd(&ctx, &m, &ComboTable::default()), Err(SamdError::DomainMissing(_))));
        ctx.r2_root = Substituent::Atom(99);
        assert!(featurize_samd(&ctx, &m, &ComboTable::default()).is_err());
        ctx.r2_root = ctx.r1_root;
        assert!(featurize_samd(&ctx, &m, &ComboTable::default()).is_err());
    }
}
