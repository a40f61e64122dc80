//! Deterministic word sampling for property suites and bracket searches.
//!
//! Seeded ChaCha8 keeps every sampled batch reproducible across runs and
//! platforms; range reduction is plain modulo since only determinism, not
//! exact uniformity, is load-bearing here.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::words::{CyclicWord, Letter, Word};

pub struct WordSampler {
    rng: ChaCha8Rng,
    rank: usize,
}

impl WordSampler {
    pub fn new(rank: usize, seed: u64) -> WordSampler {
        WordSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            rank,
        }
    }

    fn below(&mut self, n: usize) -> usize {
        (self.rng.next_u64() % n as u64) as usize
    }

    fn letter_avoiding(&mut self, forbidden: Option<Letter>) -> Letter {
        loop {
            let idx = self.below(self.rank) + 1;
            let l = if self.below(2) == 0 {
                Letter::positive(idx)
            } else {
                Letter::positive(idx).inverse()
            };
            if Some(l) != forbidden {
                return l;
            }
        }
    }

    /// Freely reduced word of length uniformly in 1..=max_len.
    pub fn reduced_word(&mut self, max_len: usize) -> Word {
        let len = self.below(max_len) + 1;
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        for _ in 0..len {
            let forbidden = letters.last().map(|l| l.inverse());
            letters.push(self.letter_avoiding(forbidden));
        }
        Word::from_reduced(letters).expect("construction avoids inverse adjacency")
    }

    /// Nontrivial cyclically reduced class of length up to max_len.
    pub fn cyclic_word(&mut self, max_len: usize) -> CyclicWord {
        loop {
            let w = self.reduced_word(max_len);
            if let (Some(c), _) = w.cyclic_reduce() {
                return c;
            }
        }
    }

    /// Positive word with length uniformly in min_len..=max_len.
    pub fn positive_word(&mut self, min_len: usize, max_len: usize) -> Word {
        let len = min_len + self.below(max_len - min_len + 1);
        let letters: Vec<Letter> = (0..len)
            .map(|_| Letter::positive(self.below(self.rank) + 1))
            .collect();
        Word::from_reduced(letters).expect("positive words are reduced")
    }

    /// Uniform index below n, for choices outside word space.
    pub fn choice(&mut self, n: usize) -> usize {
        self.below(n)
    }
}

/// All nontrivial cyclically reduced classes of length ≤ max_len, one
/// canonical representative each (rotations deduped, inverses kept).
pub fn enumerate_cyclic_words(rank: usize, max_len: usize) -> Vec<CyclicWord> {
    let mut out = std::collections::BTreeSet::new();
    let mut stack: Vec<Letter> = Vec::new();
    fn recurse(
        rank: usize,
        target: usize,
        stack: &mut Vec<Letter>,
        out: &mut std::collections::BTreeSet<CyclicWord>,
    ) {
        if stack.len() == target {
            if stack.first().map(|l| l.inverse()) != stack.last().copied() || target == 1 {
                let w = Word::from_reduced(stack.clone()).expect("reduced by construction");
                if let (Some(c), _) = w.cyclic_reduce() {
                    out.insert(c);
                }
            }
            return;
        }
        for idx in 1..=rank {
            for l in [Letter::positive(idx), Letter::positive(idx).inverse()] {
                if stack.last().is_some_and(|&p| p == l.inverse()) {
                    continue;
                }
                stack.push(l);
                recurse(rank, target, stack, out);
                stack.pop();
            }
        }
    }
    for len in 1..=max_len {
        recurse(rank, len, &mut stack, &mut out);
    }
    out.into_iter().collect()
}
