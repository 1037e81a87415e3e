//! Hashed circular (Morgan) fingerprints and Tanimoto similarity.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molecule::Molecule;

pub const DEFAULT_NBITS: usize = 2048;
pub const DEFAULT_RADIUS: u32 = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FingerprintError {
    #[error("fingerprint lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("bit count must be a positive power of two, got {0}")]
    BadLength(usize),
    #[error("malformed hex fingerprint")]
    BadHex,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
    radius: u32,
}

impl Fingerprint {
    pub fn empty(nbits: usize, radius: u32) -> Result<Self, FingerprintError> {
        if nbits == 0 || !nbits.is_power_of_two() {
            return Err(FingerprintError::BadLength(nbits));
        }
        Ok(Fingerprint { words: vec![0; nbits.div_ceil(64)], nbits, radius })
    }

    pub fn from_bits(nbits: usize, radius: u32, bits: impl IntoIterator<Item = usize>) -> Result<Self, FingerprintError> {
        let mut fp = Self::empty(nbits, radius)?;
        for b in bits {
            fp.set(b % nbits);
        }
        Ok(fp)
    }

    fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(move |&b| self.get(b))
    }

    /// Bits as 0.0/1.0 feature values.
    pub fn as_features(&self) -> Vec<f64> {
        (0..self.nbits).map(|b| if self.get(b) { 1.0 } else { 0.0 }).collect()
    }

    /// Hex dump: byte `k` covers bits `8k..8k+8`, least significant bit first.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.nbits / 4);
        for byte in 0..self.nbits.div_ceil(8) {
            let v = (self.words[byte / 8] >> ((byte % 8) * 8)) & 0xff;
            let _ = write!(s, "{v:02x}");
        }
        s
    }

    pub fn from_hex(hex: &str, radius: u32) -> Result<Self, FingerprintError> {
        if hex.len() % 2 != 0 {
            return Err(FingerprintError::BadHex);
        }
        let nbits = hex.len() * 4;
        let mut fp = Self::empty(nbits, radius)?;
        for (byte, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let s = std::str::from_utf8(chunk).map_err(|_| FingerprintError::BadHex)?;
            let v = u64::from_str_radix(s, 16).map_err(|_| FingerprintError::BadHex)?;
            fp.words[byte / 8] |= v << ((byte % 8) * 8);
        }
        Ok(fp)
    }
}

/// |a ∧ b| / |a ∨ b|; two empty fingerprints are identical (1.0).
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    if a.nbits != b.nbits {
        return Err(FingerprintError::LengthMismatch(a.nbits, b.nbits));
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    Ok(if either == 0 { 1.0 } else { both as f64 / either as f64 })
}

fn initial_invariants(m: &Molecule) -> Vec<u64> {
    (0..m.atom_count())
        .map(|i| {
            let a = m.atom(i);
            let bytes = [
                a.element.atomic_number(),
                m.degree(i) as u8,
                a.formal_charge as u8,
                a.explicit_h_count,
                m.is_ring_atom(i) as u8,
            ];
            fnv1a(&bytes)
        })
        .collect()
}

/// Atom invariants after each refinement round: entry `r` holds the radius-`r` identifiers.
pub fn morgan_invariants(m: &Molecule, radius: u32) -> Vec<Vec<u64>> {
    let mut rounds = vec![initial_invariants(m)];
    for _ in 0..radius {
        let prev = rounds.last().expect("round 0 present");
        let next = (0..m.atom_count())
            .map(|i| {
                let mut env: Vec<(u8, u64)> = m.neighbors(i).map(|(n, order)| (order.code(), prev[n])).collect();
                env.sort_unstable();
                let mut bytes = Vec::with_capacity(8 + env.len() * 9);
                bytes.extend_from_slice(&prev[i].to_le_bytes());
                for (order, inv) in env {
                    bytes.push(order);
                    bytes.extend_from_slice(&inv.to_le_bytes());
                }
                fnv1a(&bytes)
            })
            .collect();
        rounds.push(next);
    }
    rounds
}

pub fn morgan_fingerprint(m: &Molecule, radius: u32, nbits: usize) -> Result<Fingerprint, FingerprintError> {
    let mut fp = Fingerprint::empty(nbits, radius)?;
    for inv in morgan_invariants(m, radius).into_iter().flatten() {
        fp.set((inv % nbits as u64) as usize);
    }
    Ok(fp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn fp(s: &str, radius: u32) -> Fingerprint {
        morgan_fingerprint(&parse_smiles(s).unwrap(), radius, DEFAULT_NBITS).unwrap()
    }

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn renumbering_invariance() {
        assert_eq!(fp("CCO", 2), fp("OCC", 2));
    }

    #[test]
    fn distinct_atoms_radius_zero() {
        let c = fp("C", 0);
        let n = fp("N", 0);
        assert_ne!(c, n);
        assert_eq!(c.popcount(), 1);
    }

    #[test]
    fn tanimoto_cases() {
        let a = Fingerprint::from_bits(2048, 2, [1, 2, 3]).unwrap();
        let b = Fingerprint::from_bits(2048, 2, [2, 3, 4]).unwrap();
        let c = Fingerprint::from_bits(2048, 2, [10, 11]).unwrap();
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        let z = Fingerprint::empty(2048, 2).unwrap();
        assert_eq!(tanimoto(&z, &z).unwrap(), 1.0);
        let short = Fingerprint::empty(1024, 2).unwrap();
        assert_eq!(tanimoto(&a, &short), Err(FingerprintError::LengthMismatch(2048, 1024)));
    }

    #[test]
    fn hex_round_trip() {
        let f = fp("COC(=O)C(=[N+]=[N-])C/C=C/c1ccc(OC)cc1", 2);
        let hex = f.to_hex();
        assert_eq!(hex.len(), 512);
        assert_eq!(Fingerprint::from_hex(&hex, 2).unwrap(), f);
        let one = Fingerprint::from_bits(16, 0, [0, 9]).unwrap();
        assert_eq!(one.to_hex(), "0102");
    }

    #[test]
    fn bad_lengths() {
        assert_eq!(Fingerprint::empty(1000, 2), Err(FingerprintError::BadLength(1000)));
        assert!(morgan_fingerprint(&parse_smiles("C").unwrap(), 2, 0).is_err());
    }
}
