//! Seeded train/test partition.

use diazoir_learn::derive_seed;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

const SPLIT_STREAM: u64 = 0x5911;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    /// Ascending row indices.
    pub train: Vec<usize>,
    /// Ascending row indices.
    pub test: Vec<usize>,
}

/// Shuffle `0..n` and hold out `round(n * test_fraction)` rows, at least one
/// and at most `n - 1`.
pub fn split(n: usize, test_fraction: f64, seed: u64) -> Result<Split> {
    if n < 2 {
        return Err(HarnessError::TooFewRows { need: 2, got: n });
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(HarnessError::Invalid(format!("test_fraction must be in (0, 1), got {test_fraction}")));
    }
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, SPLIT_STREAM)));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_rows() {
        let s = split(10, 0.2, 3).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (8, 2));
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn seeded() {
        assert_eq!(split(50, 0.2, 9).unwrap(), split(50, 0.2, 9).unwrap());
        assert_ne!(split(50, 0.2, 9).unwrap(), split(50, 0.2, 10).unwrap());
    }

    #[test]
    fn edge_sizes() {
        let s = split(2, 0.01, 0).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (1, 1));
        assert!(split(1, 0.2, 0).is_err());
        assert!(split(5, 1.0, 0).is_err());
    }
}
