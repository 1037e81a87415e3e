//! Chemistry side of the diazo IR toolkit: a SMILES reader, diazo group
//! location, the structural attention descriptor and Morgan fingerprints.

pub mod canon;
pub mod diazo;
pub mod element;
pub mod features;
pub mod fingerprint;
pub mod molecule;
pub mod samd;
pub mod smiles;

pub use canon::{canonical_atom_order, canonical_key, CanonicalKey};
pub use diazo::{assign_domains, find_diazo, normalize_diazo, primary_context, DiazoContext, Substituent};
pub use element::Element;
pub use features::{FeatureRow, Featurizer, FeaturizeError};
pub use fingerprint::{morgan_fingerprint, tanimoto, Fingerprint, FingerprintError};
pub use molecule::{Atom, Bond, BondOrder, Molecule};
pub use samd::{featurize_samd, ComboTable, ComboTableError, Domain, SamdError, SamdVector};
pub use smiles::{parse_smiles, write_smiles, SmilesError};
