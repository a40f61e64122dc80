//! Exact word algebra over a fixed free basis.
//!
//! Letters are signed generator indices (`1 2 -1` is a·b·a⁻¹), words are
//! freely reduced letter sequences, and cyclic words are cyclically reduced
//! words stored in their canonical (lexicographically least) rotation so
//! they can serve as conjugacy-class keys in sets and files.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("letter code must be nonzero")]
    ZeroLetter,
    #[error("letter {0} exceeds rank {1}")]
    RankExceeded(i16, usize),
    #[error("sequence is not freely reduced at position {0}")]
    NotReduced(usize),
    #[error("word is trivial")]
    Trivial,
    #[error("cannot parse `{0}` as a word")]
    Parse(String),
}

/// A basis letter or its inverse, encoded as a nonzero `i16` whose absolute
/// value is the 1-based generator index.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter(i16);

impl serde::Serialize for Letter {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i16(self.0)
    }
}

impl Letter {
    pub fn new(code: i16) -> Result<Self, WordError> {
        if code == 0 {
            return Err(WordError::ZeroLetter);
        }
        Ok(Letter(code))
    }

    /// 1-based generator index.
    pub fn index(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    pub fn code(self) -> i16 {
        self.0
    }

    /// Positive letter for a 1-based generator index.
    pub fn positive(index: usize) -> Letter {
        Letter(index as i16)
    }
}

// Total order used everywhere (canonical rotations, file output):
// generator index ascending, positive before inverse.
impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.index(), !self.is_positive()).cmp(&(other.index(), !other.is_positive()))
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Word {
        Word(vec![l])
    }

    /// Free reduction: cancel adjacent inverse pairs until none remain.
    /// Idempotent and length-nonincreasing.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let iter = letters.into_iter();
        let mut buf: Vec<Letter> = Vec::with_capacity(iter.size_hint().0);
        for l in iter {
            if buf.last().is_some_and(|&last| last == l.inverse()) {
                buf.pop();
            } else {
                buf.push(l);
            }
        }
        Word(buf)
    }

    /// Wrap an already-reduced sequence, validating the invariant.
    pub fn from_reduced(letters: Vec<Letter>) -> Result<Word, WordError> {
        for i in 1..letters.len() {
            if letters[i] == letters[i - 1].inverse() {
                return Err(WordError::NotReduced(i));
            }
        }
        Ok(Word(letters))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Reduced concatenation self·other.
    pub fn concat(&self, other: &Word) -> Word {
        let mut buf = self.0.clone();
        for &l in &other.0 {
            if buf.last().is_some_and(|&last| last == l.inverse()) {
                buf.pop();
            } else {
                buf.push(l);
            }
        }
        Word(buf)
    }

    /// The factor of length `len` starting at `start` (a subword, hence reduced).
    pub fn factor(&self, start: usize, len: usize) -> Word {
        Word(self.0[start..start + len].to_vec())
    }

    pub fn max_index(&self) -> usize {
        self.0.iter().map(|l| l.index()).max().unwrap_or(0)
    }

    pub fn check_rank(&self, rank: usize) -> Result<(), WordError> {
        for l in &self.0 {
            if l.index() > rank {
                return Err(WordError::RankExceeded(l.code(), rank));
            }
        }
        Ok(())
    }

    /// Parse the integer text encoding: whitespace-separated signed indices,
    /// `e` for the empty word. Input need not be reduced.
    pub fn parse(s: &str) -> Result<Word, WordError> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let code: i16 = tok
                .parse()
                .map_err(|_| WordError::Parse(tok.to_string()))?;
            letters.push(Letter::new(code)?);
        }
        Ok(Word::reduce(letters))
    }

    pub fn cyclic_reduce(&self) -> (Option<CyclicWord>, Word) {
        cyclic_reduce(self)
    }
}

// Lets sets of words answer containment queries for borrowed letter slices
// without allocating. Consistent with `Ord`/`Hash`: both defer to the slice.
impl std::borrow::Borrow<[Letter]> for Word {
    fn borrow(&self) -> &[Letter] {
        &self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let mut first = true;
        for l in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}", l)?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w[{}]", self)
    }
}

/// A nonempty cyclically reduced word in its canonical rotation
/// (lexicographically least under the `Letter` order).
/// Two conjugate cyclically reduced words compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord(Vec<Letter>);

impl CyclicWord {
    /// Cyclically reduced length ‖w‖.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// The canonical rotation as a plain word.
    pub fn to_word(&self) -> Word {
        Word(self.0.clone())
    }

    pub fn inverse(&self) -> CyclicWord {
        let inv: Vec<Letter> = self.0.iter().rev().map(|l| l.inverse()).collect();
        CyclicWord(least_rotation(&inv).1)
    }

    /// Letter at position `i` of the biinfinite periodic extension.
    pub fn letter_mod(&self, i: usize) -> Letter {
        self.0[i % self.0.len()]
    }

    pub fn rotations(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.0.len()).map(move |i| {
            let mut v = Vec::with_capacity(self.0.len());
            v.extend_from_slice(&self.0[i..]);
            v.extend_from_slice(&self.0[..i]);
            Word(v)
        })
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_word().fmt(f)
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cyc[{}]", self.to_word())
    }
}

/// Booth's least-rotation algorithm under the `Letter` order, O(n).
/// Returns the rotation offset and the rotated sequence.
fn least_rotation(v: &[Letter]) -> (usize, Vec<Letter>) {
    let n = v.len();
    if n <= 1 {
        return (0, v.to_vec());
    }
    let at = |i: isize| v[(i as usize) % n];
    let mut f: Vec<isize> = vec![-1; 2 * n];
    let mut k: isize = 0;
    for j in 1..2 * n as isize {
        let sj = at(j);
        let mut i = f[(j - k - 1) as usize];
        while i != -1 && sj != at(k + i + 1) {
            if sj < at(k + i + 1) {
                k = j - i - 1;
            }
            i = f[i as usize];
        }
        if sj != at(k + i + 1) {
            if sj < at(k) {
                k = j;
            }
            f[(j - k) as usize] = -1;
        } else {
            f[(j - k) as usize] = i + 1;
        }
    }
    let k = k as usize % n;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&v[k..]);
    out.extend_from_slice(&v[..k]);
    (k, out)
}

/// Cyclic reduction: returns `(c, u)` with `w = u·c·u⁻¹` as reduced words,
/// where `c` carries its canonical rotation and `u` absorbs both the
/// stripped conjugating prefix and the rotation offset.
/// `c` is `None` exactly when `w` is the identity.
pub fn cyclic_reduce(w: &Word) -> (Option<CyclicWord>, Word) {
    let letters = w.letters();
    let mut lo = 0usize;
    let mut hi = letters.len();
    while hi - lo >= 2 && letters[lo] == letters[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    if lo == hi {
        (None, Word(letters[..lo].to_vec()))
    } else {
        let core = &letters[lo..hi];
        let (offset, rotated) = least_rotation(core);
        // w = p·core·p⁻¹ and core = x·(canonical)·x⁻¹ for x = core[..offset]
        let mut conjugator = Vec::with_capacity(lo + offset);
        conjugator.extend_from_slice(&letters[..lo]);
        conjugator.extend_from_slice(&core[..offset]);
        (
            Some(CyclicWord(rotated)),
            Word::from_reduced(conjugator).expect("prefix of a reduced word stays reduced"),
        )
    }
}

/// Does `v` occur as a subword of some rotation of `w` (or of `w⁻¹` when
/// flagged)? A rotation is a single period: no wrap-around beyond ‖w‖.
pub fn subword_of_cyclic_permutation(v: &Word, w: &CyclicWord, include_inverse: bool) -> bool {
    assert!(!v.is_empty(), "subword query requires nonempty v");
    if occurs_in_single_period(v.letters(), w.letters()) {
        return true;
    }
    if include_inverse {
        let wi = w.inverse();
        return occurs_in_single_period(v.letters(), wi.letters());
    }
    false
}

/// `v` occurs in `w·w` at a start position < ‖w‖ with |v| ≤ ‖w‖.
fn occurs_in_single_period(v: &[Letter], w: &[Letter]) -> bool {
    let n = w.len();
    if v.len() > n {
        return false;
    }
    let at = |i: usize| w[i % n];
    'outer: for start in 0..n {
        for (j, &lv) in v.iter().enumerate() {
            if at(start + j) != lv {
                continue 'outer;
            }
        }
        return true;
    }
    false
}

/// Letters pack into 16-bit lanes of a u128, so windows up to this depth can
/// be deduplicated without allocating.
pub(crate) const PACK_MAX_DEPTH: usize = 8;

pub(crate) fn pack_window(letters: &[Letter]) -> u128 {
    debug_assert!(letters.len() <= PACK_MAX_DEPTH);
    let mut key: u128 = 0;
    for l in letters {
        key = (key << 16) | (l.0 as u16 as u128);
    }
    key | (1u128 << 127)
}

/// All length-k factors of the biinfinite periodic words w^∞ and (w⁻¹)^∞.
/// The result is flip-closed by construction.
pub fn subwords_of_periodic_extension(
    w: &CyclicWord,
    k: usize,
) -> std::collections::BTreeSet<Word> {
    assert!(k >= 1, "depth must be at least 1");
    let mut out = std::collections::BTreeSet::new();
    let n = w.len();
    if k <= PACK_MAX_DEPTH {
        // iterated-image classes run to megabytes; dedupe windows by packed
        // key before allocating anything
        let mut seen = std::collections::HashSet::with_capacity(4 * n.min(1 << 16));
        let mut buf = [Letter(1); PACK_MAX_DEPTH];
        for start in 0..n {
            for (j, slot) in buf[..k].iter_mut().enumerate() {
                *slot = w.letter_mod(start + j);
            }
            if seen.insert(pack_window(&buf[..k])) {
                let word = Word(buf[..k].to_vec());
                out.insert(word.inverse());
                out.insert(word);
            }
        }
    } else {
        for start in 0..n {
            let mut v = Vec::with_capacity(k);
            for j in 0..k {
                v.push(w.letter_mod(start + j));
            }
            let word = Word(v);
            out.insert(word.inverse());
            out.insert(word);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn cw(s: &str) -> CyclicWord {
        w(s).cyclic_reduce().0.unwrap()
    }

    #[test]
    fn free_reduce_examples() {
        // a a^-1 b -> b
        assert_eq!(Word::reduce(w("1 -1 2").letters().to_vec()), w("2"));
        assert_eq!(Word::parse("1 -1 2").unwrap(), w("2"));
        assert_eq!(Word::parse("e").unwrap(), Word::empty());
        // a b b^-1 a -> a a: interior cancellation
        assert_eq!(Word::parse("1 2 -2 1").unwrap(), w("1 1"));
    }

    #[test]
    fn reduce_is_idempotent_on_examples() {
        let once = Word::parse("1 2 -2 -1 3").unwrap();
        let twice = Word::reduce(once.letters().to_vec());
        assert_eq!(once, twice);
        assert_eq!(once, w("3"));
    }

    #[test]
    fn cyclic_reduce_examples() {
        // c^-1 a b c -> core ab, conjugator c^-1
        let (c, u) = w("-3 1 2 3").cyclic_reduce();
        assert_eq!(c.unwrap().to_word(), w("1 2"));
        assert_eq!(u, w("-3"));

        let (c, u) = w("1 2 3").cyclic_reduce();
        assert_eq!(c.unwrap().to_word(), w("1 2 3"));
        assert!(u.is_empty());

        // a b a^-1 -> core b, conjugator a
        let (c, u) = w("1 2 -1").cyclic_reduce();
        assert_eq!(c.unwrap().to_word(), w("2"));
        assert_eq!(u, w("1"));

        // b a is already cyclically reduced; the canonical rotation is ab
        // and the conjugator absorbs the rotation: ba = b(ab)b^-1
        let (c, u) = w("2 1").cyclic_reduce();
        assert_eq!(c.unwrap().to_word(), w("1 2"));
        assert_eq!(u, w("2"));

        let (c, u) = Word::empty().cyclic_reduce();
        assert!(c.is_none());
        assert!(u.is_empty());
    }

    #[test]
    fn canonical_rotation_is_least() {
        // bca, cab, abc are the same class; canonical rotation is abc
        assert_eq!(cw("2 3 1").to_word(), w("1 2 3"));
        assert_eq!(cw("3 1 2").to_word(), w("1 2 3"));
        assert_eq!(cw("1 2 3"), cw("2 3 1"));
        // letter order is by generator index first: a^-1 sorts before b,
        // so the class of a^-1 a^-1 b canonicalizes with the inverses first
        assert_eq!(cw("2 -1 -1").to_word(), w("-1 -1 2"));
    }

    #[test]
    fn subword_of_cyclic_permutation_examples() {
        // ca occurs in rotation cab of abc
        assert!(subword_of_cyclic_permutation(&w("3 1"), &cw("1 2 3"), false));
        // ba occurs in no rotation of abc nor of its inverse
        assert!(!subword_of_cyclic_permutation(&w("2 1"), &cw("1 2 3"), true));
        // aa does not occur in the single period of w = a
        assert!(!subword_of_cyclic_permutation(&w("1 1"), &cw("1"), false));
        // but a^-1 occurs once the inverse is allowed
        assert!(subword_of_cyclic_permutation(&w("-1"), &cw("1"), true));
    }

    #[test]
    fn periodic_extension_examples() {
        let s = subwords_of_periodic_extension(&cw("1"), 2);
        let expect: std::collections::BTreeSet<Word> =
            [w("1 1"), w("-1 -1")].into_iter().collect();
        assert_eq!(s, expect);

        let s = subwords_of_periodic_extension(&cw("1 2"), 3);
        let expect: std::collections::BTreeSet<Word> =
            [w("1 2 1"), w("2 1 2"), w("-2 -1 -2"), w("-1 -2 -1")]
                .into_iter()
                .collect();
        assert_eq!(s, expect);

        let s = subwords_of_periodic_extension(&cw("1 2 3"), 3);
        let expect: std::collections::BTreeSet<Word> = [
            w("1 2 3"),
            w("2 3 1"),
            w("3 1 2"),
            w("-3 -2 -1"),
            w("-1 -3 -2"),
            w("-2 -1 -3"),
        ]
        .into_iter()
        .collect();
        assert_eq!(s, expect);
    }

    #[test]
    fn periodic_extension_rotation_invariant_exhaustive() {
        // every rotation of a cyclic word canonicalizes to the same CyclicWord,
        // so the emitted segment sets agree as well
        let word = cw("1 2 1 3");
        for rot in word.rotations() {
            let (c, _) = rot.cyclic_reduce();
            assert_eq!(c.unwrap(), word);
        }
    }

    #[test]
    fn display_parse_round_trip() {
        for s in ["e", "1", "-3", "1 2 -1", "2 2 2"] {
            let word = w(s);
            assert_eq!(Word::parse(&word.to_string()).unwrap(), word);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Word::parse("1 x").is_err());
        assert!(Word::parse("0").is_err());
    }

    /// Exhaustive reassembly check on all freely reduced rank-3 words up to
    /// length 6: u·c·u⁻¹ recovers w.
    #[test]
    fn cyclic_reduce_reassembles_exhaustively() {
        fn extend(prefix: &mut Vec<Letter>, len: usize, out: &mut Vec<Word>) {
            if prefix.len() == len {
                out.push(Word(prefix.clone()));
                return;
            }
            for code in [1i16, -1, 2, -2, 3, -3] {
                let l = Letter(code);
                if prefix.last().is_some_and(|&p| p == l.inverse()) {
                    continue;
                }
                prefix.push(l);
                extend(prefix, len, out);
                prefix.pop();
            }
        }
        let mut words = Vec::new();
        for len in 0..=6 {
            extend(&mut Vec::new(), len, &mut words);
        }
        assert!(words.len() > 20_000);
        for word in words {
            let (c, u) = word.cyclic_reduce();
            let core = c.map(|cyc| cyc.to_word()).unwrap_or_default();
            let back = u.concat(&core).concat(&u.inverse());
            assert_eq!(back, word, "u·c·u⁻¹ must recover w exactly");
        }
    }

    /// Independent oracle for the canonical rotation: scan all rotations.
    fn least_rotation_bruteforce(v: &[Letter]) -> Vec<Letter> {
        let n = v.len();
        let mut best: Option<Vec<Letter>> = None;
        for i in 0..n {
            let mut rot = Vec::with_capacity(n);
            rot.extend_from_slice(&v[i..]);
            rot.extend_from_slice(&v[..i]);
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
        best.unwrap_or_default()
    }

    #[test]
    fn booth_matches_bruteforce_exhaustively() {
        // all cyclically reduced rank-2 words up to length 7
        fn extend(prefix: &mut Vec<Letter>, len: usize, out: &mut Vec<Vec<Letter>>) {
            if prefix.len() == len {
                if len == 1 || prefix[0] != prefix[len - 1].inverse() {
                    out.push(prefix.clone());
                }
                return;
            }
            for code in [1i16, -1, 2, -2] {
                let l = Letter(code);
                if prefix.last().is_some_and(|&p| p == l.inverse()) {
                    continue;
                }
                prefix.push(l);
                extend(prefix, len, out);
                prefix.pop();
            }
        }
        let mut words = Vec::new();
        for len in 1..=7 {
            extend(&mut Vec::new(), len, &mut words);
        }
        for v in words {
            assert_eq!(
                least_rotation(&v).1,
                least_rotation_bruteforce(&v),
                "mismatch on {:?}",
                v
            );
        }
    }

    proptest! {
        #[test]
        fn reduce_idempotent_and_nonincreasing(codes in proptest::collection::vec(-3i16..=3, 0..40)) {
            let letters: Vec<Letter> = codes.into_iter().filter(|&c| c != 0).map(Letter).collect();
            let raw_len = letters.len();
            let reduced = Word::reduce(letters);
            prop_assert!(reduced.len() <= raw_len);
            let again = Word::reduce(reduced.letters().to_vec());
            prop_assert_eq!(reduced, again);
        }

        #[test]
        fn flip_closure_of_periodic_extension(codes in proptest::collection::vec(-3i16..=3, 1..10), k in 1usize..6) {
            let letters: Vec<Letter> = codes.into_iter().filter(|&c| c != 0).map(Letter).collect();
            prop_assume!(!letters.is_empty());
            let word = Word::reduce(letters);
            let (cyc, _) = word.cyclic_reduce();
            prop_assume!(cyc.is_some());
            let s = subwords_of_periodic_extension(&cyc.unwrap(), k);
            for v in &s {
                prop_assert!(s.contains(&v.inverse()));
            }
        }

        #[test]
        fn cyclic_reduce_reassembles(codes in proptest::collection::vec(-3i16..=3, 0..14)) {
            let letters: Vec<Letter> = codes.into_iter().filter(|&c| c != 0).map(Letter).collect();
            let word = Word::reduce(letters);
            let (c, u) = word.cyclic_reduce();
            let core = c.map(|cyc| cyc.to_word()).unwrap_or_default();
            prop_assert_eq!(u.concat(&core).concat(&u.inverse()), word);
        }
    }
}
