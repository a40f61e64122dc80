//! Finite-depth leaf-segment languages of algebraic laminations.
//!
//! An algebraic lamination is shadowed at depth k by the set of length-k
//! words labelling subpaths of its leaves. Every [`LamApprox`] is validated
//! on construction: flip-closed (closed under inversion) and laminar (every
//! length-(k−1) factor of a segment extends on both sides within the set).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::autos::{AutoError, Automorphism, GammaRay};
use crate::traintrack::{RoseMap, TrainTrackError, Turn};
use crate::words::{cyclic_reduce, CyclicWord, Letter, Word, WordError};

#[derive(Debug, Error)]
pub enum LamError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("segment `{0}` has length {1}, expected depth {2}")]
    WrongLength(String, usize, usize),
    #[error("segment set is not flip-closed: `{0}` present without its inverse")]
    NotFlipClosed(String),
    #[error("segment set is not laminar: `{0}` does not extend to the {1}")]
    NotLaminar(String, &'static str),
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("trivial word not allowed here")]
    TrivialWord,
    #[error("no index n ≤ {n_max} has cyclically reduced length ≥ depth {depth} for h = `{h}`")]
    HorizonTooSmall { h: String, n_max: usize, depth: usize },
    #[error("map must be flagged free of periodic INPs for dual-lamination completeness")]
    PeriodicInpsNotExcluded,
    #[error("fewer than 2 fixed directions; pass an appropriate power of the map")]
    TooFewFixedDirections,
    #[error(
        "input depth {have} is insufficient: applying this automorphism at depth {want_depth} \
         requires at least {need}"
    )]
    InsufficientDepth {
        have: usize,
        want_depth: usize,
        need: usize,
    },
    #[error("padding validation failed: doubling the cancellation allowance changed the output")]
    PaddingDiscrepancy,
    #[error("ray prefix of length {0} is shorter than 3·depth = {1}")]
    PrefixTooShort(usize, usize),
    #[error("junction word for pair {{{0}, {1}}} failed to stay reduced")]
    JunctionCancellation(Letter, Letter),
    #[error("cannot parse lamlang file: {0}")]
    Parse(String),
    #[error(transparent)]
    Auto(#[from] AutoError),
    #[error(transparent)]
    TrainTrack(#[from] TrainTrackError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Sign of a word in the fixed basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sign {
    Positive,
    Negative,
    Mixed,
}

/// Positive iff every letter is positive, negative iff every letter is
/// negative, mixed otherwise.
pub fn classify_sign(letters: &[Letter]) -> Sign {
    assert!(!letters.is_empty(), "sign of the empty word is undefined");
    let pos = letters.iter().filter(|l| l.is_positive()).count();
    if pos == letters.len() {
        Sign::Positive
    } else if pos == 0 {
        Sign::Negative
    } else {
        Sign::Mixed
    }
}

/// A depth-k leaf-segment language: the finite shadow of an algebraic
/// lamination. Immutable after construction; construction validates the
/// flip-closure and laminarity invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LamApprox {
    rank: usize,
    depth: usize,
    segments: BTreeSet<Word>,
}

impl LamApprox {
    pub fn try_new(
        rank: usize,
        depth: usize,
        segments: BTreeSet<Word>,
    ) -> Result<LamApprox, LamError> {
        if depth == 0 {
            return Err(LamError::ZeroDepth);
        }
        for s in &segments {
            if s.len() != depth {
                return Err(LamError::WrongLength(s.to_string(), s.len(), depth));
            }
            s.check_rank(rank)?;
        }
        let lam = LamApprox {
            rank,
            depth,
            segments,
        };
        lam.check_flip_closed()?;
        lam.check_laminar()?;
        Ok(lam)
    }

    pub fn empty(rank: usize, depth: usize) -> LamApprox {
        LamApprox {
            rank,
            depth,
            segments: BTreeSet::new(),
        }
    }

    fn check_flip_closed(&self) -> Result<(), LamError> {
        for s in &self.segments {
            if !self.segments.contains(&s.inverse()) {
                return Err(LamError::NotFlipClosed(s.to_string()));
            }
        }
        Ok(())
    }

    fn check_laminar(&self) -> Result<(), LamError> {
        if self.depth == 1 || self.segments.is_empty() {
            return Ok(());
        }
        let k = self.depth;
        let mut prefixes: BTreeSet<&[Letter]> = BTreeSet::new();
        let mut suffixes: BTreeSet<&[Letter]> = BTreeSet::new();
        for s in &self.segments {
            prefixes.insert(&s.letters()[..k - 1]);
            suffixes.insert(&s.letters()[1..]);
        }
        for s in &self.segments {
            // the (k-1)-prefix already extends right within s; it must also
            // extend left, i.e. appear as some segment's suffix
            if !suffixes.contains(&s.letters()[..k - 1]) {
                return Err(LamError::NotLaminar(s.to_string(), "left"));
            }
            if !prefixes.contains(&s.letters()[1..]) {
                return Err(LamError::NotLaminar(s.to_string(), "right"));
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.segments.contains(w)
    }

    pub fn segments(&self) -> impl Iterator<Item = &Word> {
        self.segments.iter()
    }

    pub fn segment_set(&self) -> &BTreeSet<Word> {
        &self.segments
    }

    pub fn union(&self, other: &LamApprox) -> Result<LamApprox, LamError> {
        self.check_compatible(other)?;
        let segments: BTreeSet<Word> = self.segments.union(&other.segments).cloned().collect();
        LamApprox::try_new(self.rank, self.depth, segments)
    }

    pub fn intersection(&self, other: &LamApprox) -> Result<LamApprox, LamError> {
        self.check_compatible(other)?;
        let segments: BTreeSet<Word> = self
            .segments
            .intersection(&other.segments)
            .cloned()
            .collect();
        LamApprox::try_new(self.rank, self.depth, segments)
    }

    pub fn is_subset(&self, other: &LamApprox) -> bool {
        self.segments.is_subset(&other.segments)
    }

    pub fn symmetric_difference(&self, other: &LamApprox) -> BTreeSet<Word> {
        self.segments
            .symmetric_difference(&other.segments)
            .cloned()
            .collect()
    }

    fn check_compatible(&self, other: &LamApprox) -> Result<(), LamError> {
        if self.depth != other.depth {
            return Err(LamError::DepthMismatch(self.depth, other.depth));
        }
        if self.rank != other.rank {
            return Err(LamError::RankMismatch(self.rank, other.rank));
        }
        Ok(())
    }

    /// Window the language down to a smaller depth.
    pub fn restrict_depth(&self, depth: usize) -> Result<LamApprox, LamError> {
        if depth == 0 {
            return Err(LamError::ZeroDepth);
        }
        if depth > self.depth {
            return Err(LamError::DepthMismatch(depth, self.depth));
        }
        let mut out = BTreeSet::new();
        for s in &self.segments {
            collect_windows(s.letters(), depth, &mut out);
        }
        LamApprox::try_new(self.rank, depth, out)
    }

    /// Canonical `lamlang v1` file bytes: header, then one segment per line
    /// in integer encoding, sorted under the letter order.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        let _ = writeln!(out, "lamlang v1 rank={} depth={}", self.rank, self.depth);
        for s in &self.segments {
            let _ = writeln!(out, "{}", s);
        }
        out.into_bytes()
    }

    pub fn parse(text: &str) -> Result<LamApprox, LamError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| LamError::Parse("empty file".into()))?;
        let rest = header
            .strip_prefix("lamlang v1 rank=")
            .ok_or_else(|| LamError::Parse(format!("bad header `{header}`")))?;
        let (rank_s, depth_s) = rest
            .split_once(" depth=")
            .ok_or_else(|| LamError::Parse(format!("bad header `{header}`")))?;
        let rank: usize = rank_s
            .parse()
            .map_err(|_| LamError::Parse(format!("bad rank `{rank_s}`")))?;
        let depth: usize = depth_s
            .trim()
            .parse()
            .map_err(|_| LamError::Parse(format!("bad depth `{depth_s}`")))?;
        let mut segments = BTreeSet::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            segments.insert(Word::parse(line)?);
        }
        LamApprox::try_new(rank, depth, segments)
    }
}

/// All length-k factors of a word, inserted into `out`.
pub fn collect_windows(letters: &[Letter], k: usize, out: &mut BTreeSet<Word>) {
    if letters.len() < k {
        return;
    }
    for start in 0..=letters.len() - k {
        let slice = &letters[start..start + k];
        if !out.contains(slice) {
            out.insert(Word::from_reduced(slice.to_vec()).expect("factor of reduced word"));
        }
    }
}

/// Insert all windows of `letters` and of its inverse.
fn collect_windows_with_flips(letters: &[Letter], k: usize, out: &mut BTreeSet<Word>) {
    if letters.len() < k {
        return;
    }
    for start in 0..=letters.len() - k {
        let slice = &letters[start..start + k];
        if !out.contains(slice) {
            let word = Word::from_reduced(slice.to_vec()).expect("factor of reduced word");
            out.insert(word.inverse());
            out.insert(word);
        }
    }
}

use crate::words::{pack_window, PACK_MAX_DEPTH};

/// L(g) at depth k: all length-k factors of w^∞ and (w⁻¹)^∞.
pub fn lam_of_conjugacy(rank: usize, w: &CyclicWord, k: usize) -> Result<LamApprox, LamError> {
    if k == 0 {
        return Err(LamError::ZeroDepth);
    }
    let segments = crate::words::subwords_of_periodic_extension(w, k);
    LamApprox::try_new(rank, k, segments)
}

/// L(Ω) at depth k: union over the finite family (the closure adds nothing
/// at finite depth for finite Ω).
pub fn lam_generated(
    rank: usize,
    omega: &[CyclicWord],
    k: usize,
) -> Result<LamApprox, LamError> {
    if k == 0 {
        return Err(LamError::ZeroDepth);
    }
    let mut segments = BTreeSet::new();
    for w in omega {
        segments.extend(crate::words::subwords_of_periodic_extension(w, k));
    }
    LamApprox::try_new(rank, k, segments)
}

#[derive(Clone, Debug, Serialize)]
pub struct LbfhInfo {
    /// Set stopped growing for two consecutive iterations before the cap.
    pub stabilized: bool,
    /// Least n at which the set had stabilized, when it did.
    pub stabilized_at: Option<usize>,
    pub iterations_used: usize,
}

/// All length-k factors of fⁿ(e) over oriented edges e and n ≤ n_max,
/// flip-closed, with stabilization detection.
pub fn lbfh_segments(
    map: &RoseMap,
    k: usize,
    n_max: usize,
) -> Result<(LamApprox, LbfhInfo), LamError> {
    if k == 0 {
        return Err(LamError::ZeroDepth);
    }
    let mut segments: BTreeSet<Word> = BTreeSet::new();
    let mut words: Vec<Word> = (1..=map.rank())
        .map(|i| Word::letter(Letter::positive(i)))
        .collect();
    let mut unchanged = 0usize;
    let mut info = LbfhInfo {
        stabilized: false,
        stabilized_at: None,
        iterations_used: 0,
    };
    for n in 1..=n_max {
        for w in words.iter_mut() {
            *w = map.apply(w)?;
        }
        let before = segments.len();
        for w in &words {
            collect_windows_with_flips(w.letters(), k, &mut segments);
        }
        info.iterations_used = n;
        if segments.len() == before && !segments.is_empty() {
            unchanged += 1;
            if unchanged >= 2 {
                info.stabilized = true;
                info.stabilized_at = Some(n - 2);
                break;
            }
        } else {
            unchanged = 0;
        }
    }
    let lam = LamApprox::try_new(map.rank(), k, segments)?;
    Ok((lam, info))
}

/// Turns crossed by some iterated edge image, collected up to the
/// stabilization horizon of the depth-2 factor language.
pub fn taken_turns(map: &RoseMap, n_max: usize) -> Result<BTreeSet<Turn>, LamError> {
    let (two_grams, _) = lbfh_segments(map, 2, n_max)?;
    let mut out = BTreeSet::new();
    for s in two_grams.segments() {
        let l = s.letters();
        let turn = Turn::new(l[0].inverse(), l[1]).expect("reduced 2-gram gives a real turn");
        out.insert(turn);
    }
    Ok(out)
}

/// One class per unordered pair of distinct fixed directions: the special
/// leaf ρ_d⁻¹ρ_d′, its sign, and whether it is diagonal (turn not taken).
#[derive(Clone, Debug, Serialize)]
pub struct SpecialLeafClass {
    /// The two distinct fixed directions, in canonical letter order.
    pub directions: (Letter, Letter),
    /// Sign of the biinfinite word ρ_d⁻¹ρ_d′.
    pub sign: Sign,
    /// True iff the turn {d, d′} is not taken by any iterated edge image.
    pub diagonal: bool,
}

impl SpecialLeafClass {
    pub fn is_mixed(&self) -> bool {
        self.sign == Sign::Mixed
    }
}

/// Classify all special-leaf classes of an expanding map whose periodic
/// directions are already fixed (pass the appropriate power). A map with
/// fewer than two fixed directions has no special leaves.
///
/// Eigenray signs are read off a length-12 prefix; for positive maps the
/// rays are sign-pure, so any prefix length gives the same answer.
pub fn special_leaf_classes(
    map: &RoseMap,
    n_max: usize,
) -> Result<Vec<SpecialLeafClass>, LamError> {
    let fixed = map.fixed_directions();
    if fixed.len() < 2 {
        return Ok(Vec::new());
    }
    let taken = taken_turns(map, n_max)?;
    let sign_len = 12usize;
    let mut out = Vec::new();
    for (i, &d1) in fixed.iter().enumerate() {
        for &d2 in &fixed[i + 1..] {
            let r1 = crate::traintrack::eigenray_prefix(map, d1, sign_len)?;
            let r2 = crate::traintrack::eigenray_prefix(map, d2, sign_len)?;
            let s1 = classify_sign(r1.letters());
            let s2 = classify_sign(r2.letters());
            // the leaf reads ρ_d1 backwards-inverted, then ρ_d2
            let sign = match (s1, s2) {
                (Sign::Negative, Sign::Positive) => Sign::Positive,
                (Sign::Positive, Sign::Negative) => Sign::Negative,
                _ => Sign::Mixed,
            };
            let turn = Turn::new(d1, d2).expect("distinct directions");
            out.push(SpecialLeafClass {
                directions: turn.directions(),
                sign,
                diagonal: !taken.contains(&turn),
            });
        }
    }
    Ok(out)
}

/// Depth-k windows of the special leaves: junction windows of ρ_d⁻¹ρ_d′ for
/// every pair of distinct fixed directions, plus the eigenray interiors that
/// make the language laminar on its own.
pub fn special_segments(map: &RoseMap, k: usize, n_max: usize) -> Result<LamApprox, LamError> {
    if k == 0 {
        return Err(LamError::ZeroDepth);
    }
    let fixed = map.fixed_directions();
    let mut segments = BTreeSet::new();

    // eigenray interiors: factors of fⁿ(d) until the window set stabilizes
    for &d in &fixed {
        let mut w = Word::letter(d);
        let mut unchanged = 0;
        for _ in 1..=n_max {
            w = map.apply(&w)?;
            let before = segments.len();
            collect_windows_with_flips(w.letters(), k, &mut segments);
            if segments.len() == before && w.len() >= k {
                unchanged += 1;
                if unchanged >= 2 {
                    break;
                }
            } else {
                unchanged = 0;
            }
        }
    }

    // junction windows across ρ_d⁻¹ | ρ_d′
    if k >= 2 {
        for (i, &d1) in fixed.iter().enumerate() {
            for &d2 in &fixed[i + 1..] {
                let p1 = crate::traintrack::eigenray_prefix(map, d1, k - 1)?;
                let p2 = crate::traintrack::eigenray_prefix(map, d2, k - 1)?;
                for (a, b) in [(&p1, &p2), (&p2, &p1)] {
                    let junction = a.inverse().concat(b);
                    if junction.len() != 2 * (k - 1) {
                        return Err(LamError::JunctionCancellation(d1, d2));
                    }
                    collect_windows_with_flips(junction.letters(), k, &mut segments);
                }
            }
        }
    }

    LamApprox::try_new(map.rank(), k, segments)
}

/// Depth-k language of the dual lamination of the stable tree of the
/// supplied map: iterated-edge-image factors plus special-leaf windows.
/// Completeness of the special/diagonal split requires the caller to certify
/// the map free of periodic INPs.
pub fn dual_lamination_segments(
    map: &RoseMap,
    k: usize,
    n_max: usize,
    certified_inp_free: bool,
) -> Result<LamApprox, LamError> {
    if !certified_inp_free {
        return Err(LamError::PeriodicInpsNotExcluded);
    }
    let (lbfh, _) = lbfh_segments(map, k, n_max)?;
    let special = special_segments(map, k, n_max)?;
    lbfh.union(&special)
}

/// Occurrence audit for one kept Mitra segment.
#[derive(Clone, Debug, Serialize)]
pub struct SegmentOccurrence {
    pub first_n: usize,
    pub last_n: usize,
    /// Indices into the h-list of the words that produced this segment.
    pub h_indices: BTreeSet<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MitraAudit {
    /// Per-segment occurrence records for the kept segments.
    pub kept: BTreeMap<String, SegmentOccurrence>,
    /// Segments seen at some n but absent from the trailing window.
    pub discarded: usize,
    /// First index of the trailing stability window.
    pub window_start: usize,
    pub n_max: usize,
}

/// Mitra's ending-lamination shadow Λ_{z,h} at depth k, unioned over h ∈ H:
/// length-k subwords of cyclic permutations of w_n = [gₙ(h)] and w_n⁻¹,
/// restricted to n with ‖w_n‖ ≥ k, kept iff they recur in the trailing
/// stability window.
pub fn mitra_segments(
    ray: &GammaRay,
    hs: &[Word],
    k: usize,
    n_max: usize,
    window: usize,
) -> Result<(LamApprox, MitraAudit), LamError> {
    if k == 0 {
        return Err(LamError::ZeroDepth);
    }
    let rank = ray.alphabet().rank();
    let window_start = n_max.saturating_sub(window);
    let mut occurrences: BTreeMap<Word, SegmentOccurrence> = BTreeMap::new();
    let mut eval = ray.evaluator();

    for (hi, h) in hs.iter().enumerate() {
        if h.is_empty() {
            return Err(LamError::TrivialWord);
        }
        let mut any = false;
        for n in 0..=n_max {
            let image = eval.apply_at(n, h)?;
            let (cyc, _) = cyclic_reduce(&image);
            let Some(cyc) = cyc else { continue };
            if cyc.len() < k {
                continue;
            }
            any = true;
            let mut seen: HashSet<u128> = HashSet::new();
            let mut fresh: Vec<Word> = Vec::new();
            let inverse = cyc.inverse();
            for letters in [cyc.letters(), inverse.letters()] {
                // single-period subwords of rotations: windows of the doubled
                // word starting within the first period
                let mut doubled = letters.to_vec();
                doubled.extend_from_slice(&letters[..(k - 1).min(letters.len())]);
                let n_windows = letters.len();
                if doubled.len() < k {
                    continue;
                }
                if k <= PACK_MAX_DEPTH {
                    for start in 0..n_windows {
                        let slice = &doubled[start..start + k];
                        if seen.insert(pack_window(slice)) {
                            fresh.push(
                                Word::from_reduced(slice.to_vec())
                                    .expect("factor of a cyclically reduced word"),
                            );
                        }
                    }
                } else {
                    let mut set = BTreeSet::new();
                    for start in 0..n_windows {
                        collect_windows(&doubled[start..start + k], k, &mut set);
                    }
                    fresh.extend(set);
                }
            }
            for word in fresh {
                occurrences
                    .entry(word)
                    .and_modify(|occ| {
                        occ.last_n = n;
                        occ.h_indices.insert(hi);
                    })
                    .or_insert_with(|| SegmentOccurrence {
                        first_n: n,
                        last_n: n,
                        h_indices: [hi].into_iter().collect(),
                    });
            }
        }
        if !any {
            return Err(LamError::HorizonTooSmall {
                h: h.to_string(),
                n_max,
                depth: k,
            });
        }
    }

    let mut kept = BTreeMap::new();
    let mut segments = BTreeSet::new();
    let mut discarded = 0usize;
    for (word, occ) in occurrences {
        if occ.last_n >= window_start {
            kept.insert(word.to_string(), occ.clone());
            segments.insert(word);
        } else {
            discarded += 1;
        }
    }
    let lam = LamApprox::try_new(rank, k, segments)?;
    Ok((
        lam,
        MitraAudit {
            kept,
            discarded,
            window_start,
            n_max,
        },
    ))
}

/// The intersection route Λ_{z,h} = ∩_j L({gᵢ(h) : i ≥ j}): nested depth-k
/// languages intersected up to the stabilization horizon J = n_max − window.
/// An independent evaluation of the same object as [`mitra_segments`].
pub fn mitra_segments_via_intersection(
    ray: &GammaRay,
    h: &Word,
    k: usize,
    n_max: usize,
    window: usize,
) -> Result<LamApprox, LamError> {
    if h.is_empty() {
        return Err(LamError::TrivialWord);
    }
    if k == 0 {
        return Err(LamError::ZeroDepth);
    }
    let rank = ray.alphabet().rank();
    let mut eval = ray.evaluator();
    let mut classes: Vec<Option<CyclicWord>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let image = eval.apply_at(n, h)?;
        classes.push(cyclic_reduce(&image).0);
    }
    // unlike the rotation route, generated languages read factors of the
    // periodic extension, so short classes need no length gate here
    let horizon = n_max.saturating_sub(window);
    // each class is windowed once; the nested tail unions L({gᵢ(h) : i ≥ j})
    // accumulate from the far end
    let per_index: Vec<BTreeSet<Word>> = classes
        .iter()
        .map(|c| match c {
            Some(w) => crate::words::subwords_of_periodic_extension(w, k),
            None => BTreeSet::new(),
        })
        .collect();
    let mut tail_union: Vec<BTreeSet<Word>> = vec![BTreeSet::new(); n_max + 2];
    for j in (0..=n_max).rev() {
        let mut set = tail_union[j + 1].clone();
        set.extend(per_index[j].iter().cloned());
        tail_union[j] = set;
    }
    let mut result: Option<LamApprox> = None;
    for tail in tail_union.iter().take(horizon + 1) {
        let term = LamApprox::try_new(rank, k, tail.clone())?;
        result = Some(match result {
            None => term,
            Some(acc) => acc.intersection(&term)?,
        });
    }
    Ok(result.expect("horizon loop runs at least once"))
}

/// Chabauty comparison at fixed depth between a sequence of languages and a
/// candidate limit, with the asymptotics operationalized by a trailing
/// window of the sequence.
#[derive(Clone, Debug, Serialize)]
pub struct ChabautyReport {
    /// Condition (1): segments appearing in the trailing window must lie in
    /// the limit. Violating segments, with the indices where they appear.
    pub cond1_violations: BTreeMap<String, Vec<usize>>,
    /// Condition (2): every limit segment must appear in all trailing terms.
    /// Violating segments, with the trailing indices where they are missing.
    pub cond2_violations: BTreeMap<String, Vec<usize>>,
    pub window_start: usize,
    pub terms: usize,
}

impl ChabautyReport {
    pub fn condition1_holds(&self) -> bool {
        self.cond1_violations.is_empty()
    }

    pub fn condition2_holds(&self) -> bool {
        self.cond2_violations.is_empty()
    }

    pub fn converged(&self) -> bool {
        self.condition1_holds() && self.condition2_holds()
    }
}

pub fn chabauty_compare(
    sequence: &[&LamApprox],
    limit: &LamApprox,
    window: usize,
) -> Result<ChabautyReport, LamError> {
    assert!(!sequence.is_empty(), "need at least one term");
    for term in sequence {
        if term.depth() != limit.depth() {
            return Err(LamError::DepthMismatch(term.depth(), limit.depth()));
        }
        if term.rank() != limit.rank() {
            return Err(LamError::RankMismatch(term.rank(), limit.rank()));
        }
    }
    let window_start = sequence.len().saturating_sub(window + 1);
    let trailing = &sequence[window_start..];

    let mut cond1_violations: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, term) in trailing.iter().enumerate() {
        for s in term.segments() {
            if !limit.contains(s) {
                cond1_violations
                    .entry(s.to_string())
                    .or_default()
                    .push(window_start + i);
            }
        }
    }

    let mut cond2_violations: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for s in limit.segments() {
        let missing: Vec<usize> = trailing
            .iter()
            .enumerate()
            .filter(|(_, term)| !term.contains(s))
            .map(|(i, _)| window_start + i)
            .collect();
        if !missing.is_empty() {
            cond2_violations.insert(s.to_string(), missing);
        }
    }

    Ok(ChabautyReport {
        cond1_violations,
        cond2_violations,
        window_start,
        terms: sequence.len(),
    })
}

/// Push a depth-padded language forward through an automorphism and window
/// the image down to depth k. The input must carry enough depth to absorb
/// bounded cancellation at both ends with the allowance `C_pad = max|Φ(x)|`.
/// The computation is repeated with the allowance doubled and any
/// discrepancy is an error, not silent acceptance, so the input depth must
/// support the doubled trim as well: `L.depth ≥ k·max|Φ(x)| + 4·C_pad`.
pub fn apply_automorphism(
    lam: &LamApprox,
    phi: &Automorphism,
    k: usize,
) -> Result<LamApprox, LamError> {
    if k == 0 {
        return Err(LamError::ZeroDepth);
    }
    if phi.rank() != lam.rank() {
        return Err(LamError::RankMismatch(phi.rank(), lam.rank()));
    }
    let c_pad = phi.max_image_len();
    let need = k * phi.max_image_len() + 4 * c_pad;
    if lam.depth() < need {
        return Err(LamError::InsufficientDepth {
            have: lam.depth(),
            want_depth: k,
            need,
        });
    }
    let run = |trim: usize| -> Result<BTreeSet<Word>, LamError> {
        let mut out = BTreeSet::new();
        for s in lam.segments() {
            let image = phi.apply(s)?;
            if image.len() < k + 2 * trim {
                continue;
            }
            let safe = &image.letters()[trim..image.len() - trim];
            collect_windows(safe, k, &mut out);
        }
        Ok(out)
    };
    let with_c = run(c_pad)?;
    let with_2c = run(2 * c_pad)?;
    if with_c != with_2c {
        return Err(LamError::PaddingDiscrepancy);
    }
    LamApprox::try_new(lam.rank(), k, with_c)
}

/// Input depth required by [`apply_automorphism`] to emit depth k.
pub fn padding_for(phi: &Automorphism, k: usize) -> usize {
    let m = phi.max_image_len();
    k * m + 4 * m
}

#[derive(Clone, Debug, Serialize)]
pub struct ProximalReport {
    /// Length-k factors occurring at least twice in the prefix.
    pub recurrent: BTreeSet<String>,
    /// Recurrent factors that are not leaf segments of the language.
    pub violations: BTreeSet<String>,
    pub proximal: bool,
}

/// Finite stand-in for proximality: every length-k factor occurring at
/// least twice in the ray prefix must be a leaf segment of L.
pub fn proximal_check(
    ray_prefix: &Word,
    lam: &LamApprox,
    k: usize,
) -> Result<ProximalReport, LamError> {
    if ray_prefix.len() < 3 * k {
        return Err(LamError::PrefixTooShort(ray_prefix.len(), 3 * k));
    }
    let mut counts: BTreeMap<&[Letter], usize> = BTreeMap::new();
    let letters = ray_prefix.letters();
    for start in 0..=letters.len() - k {
        *counts.entry(&letters[start..start + k]).or_default() += 1;
    }
    let mut recurrent = BTreeSet::new();
    let mut violations = BTreeSet::new();
    for (slice, count) in counts {
        if count >= 2 {
            let word = Word::from_reduced(slice.to_vec()).expect("factor of reduced word");
            if !lam.contains(&word) {
                violations.insert(word.to_string());
            }
            recurrent.insert(word.to_string());
        }
    }
    let proximal = violations.is_empty();
    Ok(ProximalReport {
        recurrent,
        violations,
        proximal,
    })
}

/// Census of mixed leaves reconstructed from a depth-k language: mixed
/// windows chain into junction cores of length 2(k−1), counted up to flip.
#[derive(Clone, Debug, Serialize)]
pub struct MixedCensus {
    /// Canonical junction cores (lexicographic minimum of core and flipped core).
    pub cores: BTreeSet<String>,
    pub count: usize,
    /// False when some mixed window could not be chained into a unique core.
    pub complete: bool,
}

pub fn mixed_class_census(lam: &LamApprox) -> MixedCensus {
    let k = lam.depth();
    let mut mixed: Vec<&Word> = Vec::new();
    let mut incomplete = false;
    for s in lam.segments() {
        if classify_sign(s.letters()) == Sign::Mixed {
            let changes = sign_changes(s.letters());
            if changes == 1 {
                mixed.push(s);
            } else {
                incomplete = true;
            }
        }
    }
    let mut cores: BTreeSet<Word> = BTreeSet::new();
    if k < 2 {
        return MixedCensus {
            cores: BTreeSet::new(),
            count: 0,
            complete: !incomplete,
        };
    }
    // start from windows whose sign change sits rightmost (position k-2) and
    // extend rightward by single-letter shifts through the mixed window set
    let by_prefix: BTreeMap<&[Letter], Vec<&Word>> = {
        let mut m: BTreeMap<&[Letter], Vec<&Word>> = BTreeMap::new();
        for w in &mixed {
            m.entry(&w.letters()[..k - 1]).or_default().push(w);
        }
        m
    };
    for w in &mixed {
        if sign_change_position(w.letters()) != k - 2 {
            continue;
        }
        let mut core: Vec<Letter> = w.letters().to_vec();
        let mut ok = true;
        for _ in 0..k - 2 {
            let tail = &core[core.len() - (k - 1)..];
            match by_prefix.get(tail) {
                Some(next) if next.len() == 1 => {
                    core.push(*next[0].letters().last().unwrap());
                }
                Some(_) => {
                    ok = false;
                    incomplete = true;
                    break;
                }
                None => {
                    ok = false;
                    incomplete = true;
                    break;
                }
            }
        }
        if ok {
            debug_assert_eq!(core.len(), 2 * (k - 1));
            let word = Word::from_reduced(core).expect("chained windows stay reduced");
            let flip = word.inverse();
            cores.insert(word.min(flip));
        }
    }
    // every mixed window must be a factor of some reconstructed core
    for w in &mixed {
        let covered = cores.iter().any(|core| {
            let c = core.letters();
            let f = core.inverse();
            c.windows(k).any(|win| win == w.letters())
                || f.letters().windows(k).any(|win| win == w.letters())
        });
        if !covered {
            incomplete = true;
        }
    }
    MixedCensus {
        count: cores.len(),
        cores: cores.into_iter().map(|c| c.to_string()).collect(),
        complete: !incomplete,
    }
}

fn sign_changes(letters: &[Letter]) -> usize {
    letters
        .windows(2)
        .filter(|p| p[0].is_positive() != p[1].is_positive())
        .count()
}

/// Position p of the unique sign change: between letters p and p+1.
fn sign_change_position(letters: &[Letter]) -> usize {
    letters
        .windows(2)
        .position(|p| p[0].is_positive() != p[1].is_positive())
        .expect("caller checked the window is mixed")
}
