//! Shared fixtures for the benchmark targets.

use lamlab_core::{Automorphism, RoseMap, Word};

fn w(s: &str) -> Word {
    Word::parse(s).unwrap()
}

/// a ↦ abc, b ↦ bab, c ↦ cabc with its supplied inverse.
pub fn phi() -> Automorphism {
    Automorphism::new(
        3,
        vec![w("1 2 3"), w("2 1 2"), w("3 1 2 3")],
        Some(vec![w("1 1 -3 1 1 -3 -2"), w("2 3 -1 -1"), w("3 -1")]),
        Some("phi".into()),
    )
    .unwrap()
}

/// a ↦ cab, b ↦ ca, c ↦ acab with its supplied inverse.
pub fn psi() -> Automorphism {
    Automorphism::new(
        3,
        vec![w("3 1 2"), w("3 1"), w("1 3 1 2")],
        Some(vec![w("3 -1"), w("-2 1"), w("2 1 -3")]),
        Some("psi".into()),
    )
    .unwrap()
}

pub fn phi_map() -> RoseMap {
    RoseMap::from_automorphism(&phi()).unwrap()
}

/// A long iterated image for word-level benchmarks.
pub fn long_word(iterations: u32) -> Word {
    let mut word = w("1");
    let f = phi();
    for _ in 0..iterations {
        word = f.apply(&word).unwrap();
    }
    word
}
