//! Fixtures shared by the benchmarks.

use std::collections::BTreeMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use widthmin::generate::{adler, random_structure, FormulaConfig};
use widthmin::{Formula, Structure};

/// Binary relations `E1 … En` over `domain` elements, each pair present with
/// probability `density`.
pub fn adler_structure(n: usize, domain: u32, density: f64, seed: u64) -> Structure {
    let vocab: BTreeMap<String, usize> = (1..=n).map(|i| (format!("E{i}"), 2)).collect();
    random_structure(&vocab, domain, density, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// The adler family paired with its minimized form.
pub fn adler_pair(n: usize) -> (Formula, Formula) {
    let f = adler(n);
    let g = widthmin::minimize(&f).expect("adler formulas minimize").0;
    (f, g)
}

/// Random sentences of the default shape, with a fixed seed.
pub fn random_sentences(count: usize, atoms: usize, seed: u64) -> Vec<Formula> {
    let cfg = FormulaConfig {
        atoms,
        vars: 5,
        sentence: true,
        ..FormulaConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| widthmin::generate::random_formula(&cfg, &mut rng))
        .collect()
}
