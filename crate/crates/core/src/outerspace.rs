//! Marked metric roses as points of Outer space: conjugacy lengths,
//! Lipschitz distortion brackets, the symmetrized distance, flaring checks,
//! stable-length functionals, and brute-force dual laminations.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::autos::{AutoError, Automorphism};
use crate::lamlang::{lam_generated, LamApprox, LamError};
use crate::sampling::{enumerate_cyclic_words, WordSampler};
use crate::traintrack::{PfData, RoseMap, TrainTrackError, Turn};
use crate::words::{cyclic_reduce, CyclicWord, Word};

#[derive(Debug, Error)]
pub enum OuterError {
    #[error("edge lengths must all be positive")]
    NonPositiveLength,
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("word is trivial")]
    TrivialWord,
    #[error("marking of the source rose has no supplied inverse; cannot form the change of marking")]
    MarkingNotInvertible,
    #[error("stable length did not converge within {steps} steps (word length {len})")]
    StableNonConvergence { steps: usize, len: usize },
    #[error("iterate of the class collapsed to the identity; the map is not injective on it")]
    ClassCollapsed,
    #[error("stable functional requires lambda > 1, got {0}")]
    LambdaNotExpanding(f64),
    #[error("no index admits the flaring check: window shorter than 2·N0+1")]
    ShortWindow,
    #[error("cannot parse flaring table line `{0}`")]
    Parse(String),
    #[error(transparent)]
    Auto(#[from] AutoError),
    #[error(transparent)]
    TrainTrack(#[from] TrainTrackError),
    #[error(transparent)]
    Lam(#[from] LamError),
}

/// A metric on the rose: one positive length per petal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricRose {
    lengths: Vec<f64>,
}

impl MetricRose {
    pub fn new(lengths: Vec<f64>) -> Result<MetricRose, OuterError> {
        if !lengths.iter().all(|&l| l > 0.0) {
            return Err(OuterError::NonPositiveLength);
        }
        Ok(MetricRose { lengths })
    }

    pub fn unit(rank: usize) -> MetricRose {
        MetricRose {
            lengths: vec![1.0; rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<MetricRose, OuterError> {
        MetricRose::new(self.lengths.iter().map(|l| l * factor).collect())
    }

    /// Path length of a reduced word (sum of edge lengths with multiplicity).
    pub fn path_length(&self, w: &Word) -> f64 {
        w.letters()
            .iter()
            .map(|l| self.lengths[l.index() - 1])
            .sum()
    }
}

/// A marked metric rose: a point of Outer space restricted to roses.
/// The marking is the change of marking from the base rose.
#[derive(Clone, Debug)]
pub struct MarkedRose {
    metric: MetricRose,
    marking: Automorphism,
}

impl MarkedRose {
    pub fn new(metric: MetricRose, marking: Automorphism) -> Result<MarkedRose, OuterError> {
        if metric.rank() != marking.rank() {
            return Err(OuterError::RankMismatch(metric.rank(), marking.rank()));
        }
        Ok(MarkedRose { metric, marking })
    }

    pub fn base(rank: usize) -> MarkedRose {
        MarkedRose {
            metric: MetricRose::unit(rank),
            marking: Automorphism::identity(rank),
        }
    }

    pub fn rank(&self) -> usize {
        self.metric.rank()
    }

    pub fn metric(&self) -> &MetricRose {
        &self.metric
    }

    pub fn marking(&self) -> &Automorphism {
        &self.marking
    }

    /// ℓ(w | G): weighted cyclically reduced length of marking(w).
    pub fn length_of_class(&self, w: &Word) -> Result<f64, OuterError> {
        if w.is_empty() {
            return Err(OuterError::TrivialWord);
        }
        let image = self.marking.apply(w)?;
        let (cyc, _) = cyclic_reduce(&image);
        Ok(cyc.map(|c| self.metric.path_length(&c.to_word())).unwrap_or(0.0))
    }

    pub fn length_of_cyclic(&self, w: &CyclicWord) -> Result<f64, OuterError> {
        self.length_of_class(&w.to_word())
    }
}

/// Certified two-sided bracket for the extremal Lipschitz distortion.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzBracket {
    /// Max class-length ratio over the searched candidates (a true lower bound).
    pub lower: f64,
    /// Lipschitz constant of the edgewise-linear change-of-marking map
    /// (a true upper bound).
    pub upper: f64,
    /// Candidate achieving the lower bound.
    pub witness: String,
    /// Bracket collapsed: the candidate search achieved the edgewise constant.
    pub tight: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BracketSearch {
    /// Enumerate all classes up to this length (default 2N).
    pub search_len: usize,
    pub samples: usize,
    pub sample_max_len: usize,
    pub seed: u64,
}

impl BracketSearch {
    pub fn default_for_rank(rank: usize) -> BracketSearch {
        BracketSearch {
            search_len: 2 * rank,
            samples: 200,
            sample_max_len: 40,
            seed: 7,
        }
    }
}

fn change_of_marking(g1: &MarkedRose, g2: &MarkedRose) -> Result<Automorphism, OuterError> {
    if g1.rank() != g2.rank() {
        return Err(OuterError::RankMismatch(g1.rank(), g2.rank()));
    }
    if g1.marking().is_identity() {
        return Ok(g2.marking().clone());
    }
    let inv = g1
        .marking()
        .inverse()
        .map_err(|_| OuterError::MarkingNotInvertible)?;
    Ok(g2.marking().compose(&inv)?)
}

/// Bracket for Lip(G1, G2): lower from the max length ratio over enumerated
/// and sampled classes, upper from the edgewise-linear representative of the
/// change of marking. lower ≤ Lip ≤ upper always.
pub fn lipschitz_bracket(
    g1: &MarkedRose,
    g2: &MarkedRose,
    search: BracketSearch,
) -> Result<LipschitzBracket, OuterError> {
    let change = change_of_marking(g1, g2)?;
    let rank = g1.rank();

    let mut upper = 0.0f64;
    for i in 1..=rank {
        let e = Word::letter(crate::words::Letter::positive(i));
        let image = change.apply(&e)?;
        let ratio = g2.metric().path_length(&image) / g1.metric().lengths()[i - 1];
        upper = upper.max(ratio);
    }

    let mut lower = 0.0f64;
    let mut witness = String::new();
    let mut consider = |w: &CyclicWord| -> Result<(), OuterError> {
        let l1 = g1.length_of_cyclic(w)?;
        let l2 = g2.length_of_cyclic(w)?;
        if l1 > 0.0 {
            let r = l2 / l1;
            if r > lower {
                lower = r;
                witness = w.to_string();
            }
        }
        Ok(())
    };
    for w in enumerate_cyclic_words(rank, search.search_len) {
        consider(&w)?;
    }
    let mut sampler = WordSampler::new(rank, search.seed);
    for _ in 0..search.samples {
        let w = sampler.cyclic_word(search.sample_max_len);
        consider(&w)?;
    }

    let tight = (upper - lower).abs() <= 1e-12 * upper.max(1.0);
    Ok(LipschitzBracket {
        lower,
        upper,
        witness,
        tight,
    })
}

/// Bracket for the symmetrized Lipschitz distance d_sym = d(G1,G2) + d(G2,G1).
#[derive(Clone, Debug, Serialize)]
pub struct DsymBracket {
    pub lower: f64,
    pub upper: f64,
    pub forward: LipschitzBracket,
    pub backward: LipschitzBracket,
}

pub fn d_sym(
    g1: &MarkedRose,
    g2: &MarkedRose,
    search: BracketSearch,
) -> Result<DsymBracket, OuterError> {
    let forward = lipschitz_bracket(g1, g2, search)?;
    let backward = lipschitz_bracket(g2, g1, search)?;
    Ok(DsymBracket {
        lower: forward.lower.ln() + backward.lower.ln(),
        upper: forward.upper.ln() + backward.upper.ln(),
        forward,
        backward,
    })
}

/// Per-class length tables along an indexed family of points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlaringTable {
    rows: BTreeMap<String, BTreeMap<i64, f64>>,
}

impl FlaringTable {
    pub fn new() -> FlaringTable {
        FlaringTable::default()
    }

    pub fn insert(&mut self, class: &str, index: i64, length: f64) {
        self.rows.entry(class.to_string()).or_default().insert(index, length);
    }

    pub fn classes(&self) -> impl Iterator<Item = (&str, &BTreeMap<i64, f64>)> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Parse delimiter-separated rows `index, class, length` (commas or
    /// whitespace; `#` starts a comment).
    pub fn parse(text: &str) -> Result<FlaringTable, OuterError> {
        let mut table = FlaringTable::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 3 {
                return Err(OuterError::Parse(line.to_string()));
            }
            let index: i64 = fields[0]
                .parse()
                .map_err(|_| OuterError::Parse(line.to_string()))?;
            let length: f64 = fields[2]
                .parse()
                .map_err(|_| OuterError::Parse(line.to_string()))?;
            table.insert(fields[1], index, length);
        }
        Ok(table)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlaringViolation {
    pub class: String,
    pub index: i64,
    pub scaled_length: f64,
    pub best_neighbor: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlaringReport {
    pub lambda: f64,
    pub n0: i64,
    pub checked: usize,
    pub violations: Vec<FlaringViolation>,
}

impl FlaringReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify λ·ℓ(α|t) ≤ max{ℓ(α|t−N0), ℓ(α|t+N0)} at every index where both
/// neighbors are present.
pub fn flaring_check(
    table: &FlaringTable,
    lambda: f64,
    n0: i64,
) -> Result<FlaringReport, OuterError> {
    assert!(n0 >= 1, "flaring distance must be positive");
    let mut checked = 0usize;
    let mut violations = Vec::new();
    for (class, row) in table.classes() {
        for (&t, &len) in row {
            let (Some(&before), Some(&after)) = (row.get(&(t - n0)), row.get(&(t + n0))) else {
                continue;
            };
            checked += 1;
            let lhs = lambda * len;
            let rhs = before.max(after);
            if lhs > rhs * (1.0 + 1e-12) {
                violations.push(FlaringViolation {
                    class: class.to_string(),
                    index: t,
                    scaled_length: lhs,
                    best_neighbor: rhs,
                });
            }
        }
    }
    if checked == 0 {
        return Err(OuterError::ShortWindow);
    }
    Ok(FlaringReport {
        lambda,
        n0,
        checked,
        violations,
    })
}

/// Translation-length functional of the stable tree of the supplied map,
/// realized as ℓ(w) = lim λ⁻ⁿ·ℓ_PF(fⁿ(w)) on cyclically reduced iterates.
///
/// The iteration stops exactly when the cyclic word crosses no illegal turn:
/// from then on no cancellation ever occurs and the limit is the current
/// scaled PF-length. Orbits that keep cancelling (periodic Nielsen-path
/// circuits) fall back to the Cauchy criterion.
pub struct StableLengthFunctional {
    map: RoseMap,
    pf: PfData,
    illegal: std::collections::BTreeSet<Turn>,
    pub tol: f64,
    pub step_cap: usize,
    pub len_cap: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StableLength {
    pub value: f64,
    /// Iterations of the map used before the value was certified.
    pub iterations: usize,
    /// True when the orbit reached an illegal-turn-free word, making the
    /// reported value exact up to eigenvector rounding.
    pub exact: bool,
}

impl StableLengthFunctional {
    pub fn new(map: RoseMap, tol: f64, step_cap: usize) -> Result<Self, OuterError> {
        let (_, pf) = map.transition_and_pf(1e-12, 100_000)?;
        if pf.lambda <= 1.0 {
            return Err(OuterError::LambdaNotExpanding(pf.lambda));
        }
        let illegal = map.illegal_turns();
        Ok(StableLengthFunctional {
            map,
            pf,
            illegal,
            tol,
            step_cap,
            len_cap: 2_000_000,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.pf.lambda
    }

    pub fn pf(&self) -> &PfData {
        &self.pf
    }

    pub fn map(&self) -> &RoseMap {
        &self.map
    }

    fn crosses_illegal_turn(&self, w: &CyclicWord) -> bool {
        if self.illegal.is_empty() {
            return false;
        }
        let letters = w.letters();
        let n = letters.len();
        (0..n).any(|i| {
            let turn = Turn::new(letters[i].inverse(), letters[(i + 1) % n]);
            // single-letter cyclic words meet the degenerate pair {x, x⁻¹}?
            // no: the wrap turn of (x) is {x⁻¹, x}, nondegenerate for x ≠ x⁻¹
            turn.is_some_and(|t| self.illegal.contains(&t))
        })
    }

    pub fn stable_length(&self, w: &Word) -> Result<StableLength, OuterError> {
        let (Some(mut current), _) = cyclic_reduce(w) else {
            return Err(OuterError::TrivialWord);
        };
        current.to_word().check_rank(self.map.rank()).map_err(AutoError::from)?;
        let mut scale = 1.0f64;
        let inv_lambda = 1.0 / self.pf.lambda;
        let mut prev_y = f64::INFINITY;
        let mut small_diffs = 0usize;
        const MIN_STEPS_FOR_CAUCHY: usize = 12;

        for n in 0..=self.step_cap {
            let y = scale * self.pf.pf_length(current.letters());
            if !self.crosses_illegal_turn(&current) {
                return Ok(StableLength {
                    value: y,
                    iterations: n,
                    exact: true,
                });
            }
            if (prev_y - y).abs() < self.tol {
                small_diffs += 1;
                if small_diffs >= 3 && n >= MIN_STEPS_FOR_CAUCHY {
                    return Ok(StableLength {
                        value: y,
                        iterations: n,
                        exact: false,
                    });
                }
            } else {
                small_diffs = 0;
            }
            prev_y = y;
            if current.len() > self.len_cap {
                return Err(OuterError::StableNonConvergence {
                    steps: n,
                    len: current.len(),
                });
            }
            let image = self.map.apply(&current.to_word())?;
            let (next, _) = cyclic_reduce(&image);
            current = next.ok_or(OuterError::ClassCollapsed)?;
            scale *= inv_lambda;
        }
        Err(OuterError::StableNonConvergence {
            steps: self.step_cap,
            len: current.len(),
        })
    }
}

/// Brute-force dual lamination of a marked rose: enumerate classes up to
/// max_len, keep the ε-short ones, and emit their depth-k language.
pub fn dual_lam_bruteforce(
    rose: &MarkedRose,
    epsilon: f64,
    max_len: usize,
    k: usize,
) -> Result<(LamApprox, Vec<CyclicWord>), OuterError> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut short = Vec::new();
    for w in enumerate_cyclic_words(rose.rank(), max_len) {
        if rose.length_of_cyclic(&w)? <= epsilon {
            short.push(w);
        }
    }
    let lam = lam_generated(rose.rank(), &short, k)?;
    Ok((lam, short))
}
