//! Self-maps of the rose as train-track representatives: direction dynamics,
//! turn legality, transition matrices with Perron-Frobenius data, eigenrays,
//! and attracting fixed rays.
//!
//! The rose has one vertex; a direction is an oriented petal, i.e. a letter.
//! A turn is an unordered pair of distinct directions. A turn is illegal when
//! some iterate of the direction map collapses it to a degenerate pair; a
//! train-track map never crosses an illegal turn with an edge image.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::autos::{AutoError, Automorphism};
use crate::words::{Letter, Word};

#[derive(Debug, Error)]
pub enum TrainTrackError {
    #[error("edge image of generator {0} is empty")]
    EmptyImage(usize),
    #[error("map is not a train track: image of {edge} crosses illegal turn {{{d1}, {d2}}} at position {position}")]
    IllegalTurnCrossed {
        edge: usize,
        position: usize,
        d1: Letter,
        d2: Letter,
    },
    #[error("map is not expanding (some column of M^(2N) sums below 2)")]
    NotExpanding,
    #[error("transition matrix is reducible")]
    Reducible,
    #[error("power iteration did not reach residual {residual:e} within {cap} iterations")]
    NonConvergence { residual: f64, cap: usize },
    #[error("direction {0} is not fixed by the direction map")]
    DirectionNotFixed(Letter),
    #[error(transparent)]
    Auto(#[from] AutoError),
}

/// An unordered pair of distinct directions, stored sorted.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Turn(Letter, Letter);

impl Turn {
    pub fn new(a: Letter, b: Letter) -> Option<Turn> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Turn(a, b)),
            std::cmp::Ordering::Greater => Some(Turn(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn directions(self) -> (Letter, Letter) {
        (self.0, self.1)
    }
}

/// A self-map of the rose given by edge images.
#[derive(Clone, Debug)]
pub struct RoseMap {
    auto: Automorphism,
}

impl RoseMap {
    pub fn new(rank: usize, edge_images: Vec<Word>) -> Result<RoseMap, TrainTrackError> {
        for (i, im) in edge_images.iter().enumerate() {
            if im.is_empty() {
                return Err(TrainTrackError::EmptyImage(i + 1));
            }
        }
        let auto = Automorphism::new(rank, edge_images, None, None)?;
        Ok(RoseMap { auto })
    }

    pub fn from_automorphism(auto: &Automorphism) -> Result<RoseMap, TrainTrackError> {
        for (i, im) in auto.images().iter().enumerate() {
            if im.is_empty() {
                return Err(TrainTrackError::EmptyImage(i + 1));
            }
        }
        Ok(RoseMap { auto: auto.clone() })
    }

    pub fn rank(&self) -> usize {
        self.auto.rank()
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.auto
    }

    pub fn edge_images(&self) -> &[Word] {
        self.auto.images()
    }

    /// Image of an oriented edge (inverse directions get the inverse word).
    pub fn image_of_direction(&self, d: Letter) -> Word {
        self.auto.image_of_letter(d)
    }

    pub fn apply(&self, w: &Word) -> Result<Word, TrainTrackError> {
        Ok(self.auto.apply(w)?)
    }

    pub fn power(&self, n: u32) -> RoseMap {
        RoseMap {
            auto: self.auto.power(n),
        }
    }

    /// All 2N directions in canonical letter order.
    pub fn directions(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(2 * self.rank());
        for i in 1..=self.rank() {
            out.push(Letter::positive(i));
            out.push(Letter::positive(i).inverse());
        }
        out.sort();
        out
    }

    /// First-letter dynamics d ↦ initial letter of the image of d.
    pub fn direction_map(&self, d: Letter) -> Letter {
        self.image_of_direction(d)
            .first()
            .expect("edge images are nonempty")
    }

    pub fn direction_map_table(&self) -> BTreeMap<Letter, Letter> {
        self.directions()
            .into_iter()
            .map(|d| (d, self.direction_map(d)))
            .collect()
    }

    /// Directions lying on cycles of the direction map, with their periods.
    pub fn periodic_directions(&self) -> Vec<(Letter, usize)> {
        let dirs = self.directions();
        let mut out = Vec::new();
        for &d in &dirs {
            // walk 2N steps to guarantee landing on the eventual cycle
            let mut x = d;
            for _ in 0..dirs.len() {
                x = self.direction_map(x);
            }
            // d is periodic iff it lies on its own orbit cycle
            let mut y = x;
            let mut period = 0;
            loop {
                y = self.direction_map(y);
                period += 1;
                if y == x {
                    break;
                }
            }
            let mut z = d;
            let mut on_cycle = false;
            for _ in 0..period {
                z = self.direction_map(z);
                if z == d {
                    on_cycle = true;
                    break;
                }
            }
            if on_cycle {
                let mut p = 1;
                let mut z = self.direction_map(d);
                while z != d {
                    z = self.direction_map(z);
                    p += 1;
                }
                out.push((d, p));
            }
        }
        out
    }

    /// Directions fixed by the direction map.
    pub fn fixed_directions(&self) -> Vec<Letter> {
        self.directions()
            .into_iter()
            .filter(|&d| self.direction_map(d) == d)
            .collect()
    }

    /// A turn is legal iff no iterate of the direction map degenerates it.
    pub fn is_legal_turn(&self, turn: Turn) -> bool {
        let (mut a, mut b) = turn.directions();
        let bound = 4 * self.rank() * self.rank() + 2;
        for _ in 0..bound {
            if a == b {
                return false;
            }
            a = self.direction_map(a);
            b = self.direction_map(b);
        }
        a != b
    }

    pub fn illegal_turns(&self) -> BTreeSet<Turn> {
        let dirs = self.directions();
        let mut out = BTreeSet::new();
        for (i, &a) in dirs.iter().enumerate() {
            for &b in &dirs[i + 1..] {
                let t = Turn::new(a, b).unwrap();
                if !self.is_legal_turn(t) {
                    out.insert(t);
                }
            }
        }
        out
    }

    /// Combinatorial sufficient train-track check: no edge image crosses an
    /// illegal turn. Positive maps pass trivially.
    pub fn train_track_check(&self) -> Result<(), TrainTrackError> {
        for (e, im) in self.edge_images().iter().enumerate() {
            for (pos, pair) in im.letters().windows(2).enumerate() {
                let turn = Turn::new(pair[0].inverse(), pair[1])
                    .expect("reduced word never crosses a degenerate turn");
                if !self.is_legal_turn(turn) {
                    let (d1, d2) = turn.directions();
                    return Err(TrainTrackError::IllegalTurnCrossed {
                        edge: e + 1,
                        position: pos,
                        d1,
                        d2,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn transition_matrix(&self) -> TransitionMatrix {
        let n = self.rank();
        let mut entries = vec![0u64; n * n];
        for (j, im) in self.edge_images().iter().enumerate() {
            for l in im.letters() {
                entries[(l.index() - 1) * n + j] += 1;
            }
        }
        TransitionMatrix { n, entries }
    }

    /// Expanding: every column of M^(2N) sums to at least 2, which excludes
    /// permutation and inner degeneracies.
    pub fn is_expanding(&self) -> bool {
        let m = self.transition_matrix();
        let p = m.power(2 * self.rank() as u32);
        (0..p.n).all(|j| (0..p.n).map(|i| p.get(i, j)).sum::<u64>() >= 2)
    }

    pub fn transition_and_pf(
        &self,
        residual_tol: f64,
        cap: usize,
    ) -> Result<(TransitionMatrix, PfData), TrainTrackError> {
        let m = self.transition_matrix();
        if !m.is_irreducible() {
            return Err(TrainTrackError::Reducible);
        }
        let pf = m.perron_frobenius(residual_tol, cap)?;
        Ok((m, pf))
    }
}

/// Nonnegative integer transition matrix; entry (i, j) counts occurrences of
/// edge i or its inverse in the image of edge j.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<u64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn power(&self, k: u32) -> TransitionMatrix {
        let mut result = TransitionMatrix::identity(self.n);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    fn identity(n: usize) -> TransitionMatrix {
        let mut entries = vec![0u64; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        TransitionMatrix { n, entries }
    }

    fn mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let n = self.n;
        let mut entries = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] =
                        entries[i * n + j].saturating_add(a.saturating_mul(other.get(k, j)));
                }
            }
        }
        TransitionMatrix { n, entries }
    }

    /// Strong connectivity of the support digraph.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n;
        if n == 0 {
            return false;
        }
        let mut reach = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                reach[i * n + j] = i == j || self.get(i, j) > 0;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    reach[i * n + j] =
                        reach[i * n + j] || (reach[i * n + k] && reach[k * n + j]);
                }
            }
        }
        reach.iter().all(|&r| r)
    }

    /// Perron-Frobenius data by power iteration from the all-ones vector.
    pub fn perron_frobenius(
        &self,
        residual_tol: f64,
        cap: usize,
    ) -> Result<PfData, TrainTrackError> {
        let (lambda_r, right, res_r, it_r) = self.power_iterate(false, residual_tol, cap)?;
        let (_, left, res_l, it_l) = self.power_iterate(true, residual_tol, cap)?;
        Ok(PfData {
            lambda: lambda_r,
            left_eigenvector: left,
            right_eigenvector: right,
            residual: res_r.max(res_l),
            iterations: it_r.max(it_l),
            residual_tol,
        })
    }

    fn power_iterate(
        &self,
        transpose: bool,
        tol: f64,
        cap: usize,
    ) -> Result<(f64, Vec<f64>, f64, usize), TrainTrackError> {
        let n = self.n;
        let apply = |v: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (i, slot) in out.iter_mut().enumerate() {
                for (j, x) in v.iter().enumerate() {
                    let m = if transpose { self.get(j, i) } else { self.get(i, j) } as f64;
                    *slot += m * x;
                }
            }
            out
        };
        let mut v = vec![1.0 / n as f64; n];
        let mut last_residual = f64::INFINITY;
        for it in 0..=cap {
            let mv = apply(&v);
            let sum: f64 = mv.iter().sum();
            if sum <= 0.0 {
                return Err(TrainTrackError::Reducible);
            }
            let lambda = sum; // v sums to 1
            let residual = mv
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - lambda * b).abs())
                .fold(0.0f64, f64::max);
            if residual < tol {
                return Ok((lambda, v, residual, it));
            }
            last_residual = residual;
            v = mv.iter().map(|x| x / sum).collect();
        }
        Err(TrainTrackError::NonConvergence {
            residual: last_residual,
            cap,
        })
    }
}

/// Perron-Frobenius eigendata. The left eigenvector gives the train-track
/// edge lengths (normalized to sum 1).
#[derive(Clone, Debug, Serialize)]
pub struct PfData {
    pub lambda: f64,
    pub left_eigenvector: Vec<f64>,
    pub right_eigenvector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub residual_tol: f64,
}

impl PfData {
    /// PF-weighted length of a word (sum of edge lengths with multiplicity).
    pub fn pf_length(&self, letters: &[Letter]) -> f64 {
        letters
            .iter()
            .map(|l| self.left_eigenvector[l.index() - 1])
            .sum()
    }
}

/// The fixed infinite word lim fⁿ(d) at a fixed expanding direction, with a
/// monotonically growing prefix cache behind a mutex.
pub struct Eigenray {
    map: RoseMap,
    direction: Letter,
    cache: Mutex<Vec<Letter>>,
}

impl Eigenray {
    pub fn new(map: RoseMap, direction: Letter) -> Result<Eigenray, TrainTrackError> {
        if map.direction_map(direction) != direction {
            return Err(TrainTrackError::DirectionNotFixed(direction));
        }
        if !map.is_expanding() {
            return Err(TrainTrackError::NotExpanding);
        }
        Ok(Eigenray {
            map,
            direction,
            cache: Mutex::new(vec![direction]),
        })
    }

    pub fn direction(&self) -> Letter {
        self.direction
    }

    /// The length-`len` initial segment of lim fⁿ(d). Since f(d) begins with
    /// d and the map is expanding, every fⁿ(d) is a prefix of fⁿ⁺¹(d).
    pub fn prefix(&self, len: usize) -> Word {
        let mut cache = self.cache.lock().unwrap();
        while cache.len() < len {
            let current = Word::from_reduced(cache.clone()).expect("cache holds a reduced prefix");
            let next = self
                .map
                .apply(&current)
                .expect("rank is preserved by iteration");
            debug_assert!(next.len() > cache.len(), "expanding map must grow prefixes");
            debug_assert_eq!(&next.letters()[..cache.len()], &cache[..]);
            *cache = next.letters().to_vec();
        }
        Word::from_reduced(cache[..len].to_vec()).expect("prefix of a reduced word is reduced")
    }
}

/// Length-L prefix of the eigenray at a fixed direction of an expanding map.
pub fn eigenray_prefix(
    map: &RoseMap,
    direction: Letter,
    len: usize,
) -> Result<Word, TrainTrackError> {
    Ok(Eigenray::new(map.clone(), direction)?.prefix(len))
}

/// For each direction d with f(d) beginning with d and |f(d)| ≥ 2, the
/// length-L prefix of lim fⁿ(d). These shadow the attracting fixed points of
/// an expanding train-track automorphism; there are at most 2N of them.
pub fn attracting_fixed_rays(
    map: &RoseMap,
    len: usize,
) -> Result<Vec<(Letter, Word)>, TrainTrackError> {
    if !map.is_expanding() {
        return Err(TrainTrackError::NotExpanding);
    }
    let mut out = Vec::new();
    for d in map.directions() {
        let im = map.image_of_direction(d);
        if im.first() == Some(d) && im.len() >= 2 {
            out.push((d, eigenray_prefix(map, d, len)?));
        }
    }
    Ok(out)
}
