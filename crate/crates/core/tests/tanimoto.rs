use std::collections::BTreeSet;

use diazoir::{tanimoto, Fingerprint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_fp(rng: &mut ChaCha8Rng, nbits: usize) -> (Fingerprint, BTreeSet<usize>) {
    let density = rng.random_range(0.0..0.3);
    let on: BTreeSet<usize> = (0..nbits).filter(|_| rng.random_bool(density)).collect();
    (Fingerprint::from_bits(nbits, 2, on.iter().copied()).unwrap(), on)
}

/// |A ∩ B| / |A ∪ B| on explicit sets, 1 when both are empty.
fn set_tanimoto(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

#[test]
fn axioms_on_ten_thousand_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..10_000 {
        let nbits = [64, 256, 1024, 2048][i % 4];
        let (a, sa) = random_fp(&mut rng, nbits);
        let (b, sb) = random_fp(&mut rng, nbits);
        let ab = tanimoto(&a, &b).unwrap();
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        assert_eq!(ab, tanimoto(&b, &a).unwrap());
        assert!((0.0..=1.0).contains(&ab));
        assert!((ab - set_tanimoto(&sa, &sb)).abs() < 1e-15);
    }
}

#[test]
fn empty_and_mismatched() {
    let e = Fingerprint::empty(128, 2).unwrap();
    assert_eq!(tanimoto(&e, &e).unwrap(), 1.0);
    let full = Fingerprint::from_bits(128, 2, 0..128).unwrap();
    assert_eq!(tanimoto(&e, &full).unwrap(), 0.0);
    assert!(tanimoto(&e, &Fingerprint::empty(256, 2).unwrap()).is_err());
}
