//! Automorphisms of the free group given by basis images, words in a
//! generating set of a subgroup of Out(F), and the cyclically-reduced
//! length-growth data along rays.
//!
//! Inverses are never computed; when supplied they are verified exactly at
//! construction. The evaluation convention for a ray g = L₁L₂…Lₙ is
//! g(h) = L₁(L₂(…Lₙ(h)…)), fixed globally.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::words::{cyclic_reduce, Letter, Word, WordError};

#[derive(Debug, Error)]
pub enum AutoError {
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("supplied inverse fails on generator {0}: images∘inverse is not the identity")]
    BadInverse(usize),
    #[error("no inverse images supplied for `{0}`")]
    NoInverse(String),
    #[error("unknown generator name `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("argument is the trivial word")]
    TrivialArgument,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// An automorphism of F_N presented by the images of the basis letters.
#[derive(Clone, PartialEq, Eq)]
pub struct Automorphism {
    rank: usize,
    images: Vec<Word>,
    inverse_images: Option<Vec<Word>>,
    name: Option<String>,
}

impl Automorphism {
    pub fn new(
        rank: usize,
        images: Vec<Word>,
        inverse_images: Option<Vec<Word>>,
        name: Option<String>,
    ) -> Result<Self, AutoError> {
        if rank < 2 {
            return Err(AutoError::RankTooSmall(rank));
        }
        if images.len() != rank {
            return Err(AutoError::RankMismatch {
                expected: rank,
                got: images.len(),
            });
        }
        for im in &images {
            im.check_rank(rank)?;
        }
        if let Some(inv) = &inverse_images {
            if inv.len() != rank {
                return Err(AutoError::RankMismatch {
                    expected: rank,
                    got: inv.len(),
                });
            }
            for im in inv {
                im.check_rank(rank)?;
            }
        }
        let auto = Automorphism {
            rank,
            images,
            inverse_images,
            name,
        };
        if auto.inverse_images.is_some() {
            auto.verify_inverse()?;
        }
        Ok(auto)
    }

    pub fn identity(rank: usize) -> Automorphism {
        let images: Vec<Word> = (1..=rank)
            .map(|i| Word::letter(Letter::positive(i)))
            .collect();
        Automorphism {
            rank,
            images: images.clone(),
            inverse_images: Some(images),
            name: None,
        }
    }

    fn verify_inverse(&self) -> Result<(), AutoError> {
        let inv = self.inverse_images.as_ref().unwrap();
        for i in 1..=self.rank {
            let x = Word::letter(Letter::positive(i));
            let a = self.apply_word(&inv[i - 1]);
            let b = apply_images(inv, &self.images[i - 1]);
            if a != x || b != x {
                return Err(AutoError::BadInverse(i));
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse_images.is_some()
    }

    /// Image of a single letter (inverse letters map to inverse words).
    pub fn image_of_letter(&self, l: Letter) -> Word {
        let im = &self.images[l.index() - 1];
        if l.is_positive() {
            im.clone()
        } else {
            im.inverse()
        }
    }

    /// Freely reduced image of a word.
    pub fn apply(&self, w: &Word) -> Result<Word, AutoError> {
        if w.max_index() > self.rank {
            return Err(AutoError::RankMismatch {
                expected: self.rank,
                got: w.max_index(),
            });
        }
        Ok(self.apply_word(w))
    }

    fn apply_word(&self, w: &Word) -> Word {
        apply_images(&self.images, w)
    }

    /// self ∘ other: sends w to self(other(w)).
    ///
    /// The result carries no supplied inverse. Inverse words of iterated
    /// compositions grow with the expansion factor of the inverse map, which
    /// routinely dwarfs the forward growth; callers that need the inverse of
    /// a composite compose the supplied inverses in the opposite order.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism, AutoError> {
        if self.rank != other.rank {
            return Err(AutoError::RankMismatch {
                expected: self.rank,
                got: other.rank,
            });
        }
        let images: Vec<Word> = other.images.iter().map(|im| self.apply_word(im)).collect();
        Ok(Automorphism {
            rank: self.rank,
            images,
            inverse_images: None,
            name: None,
        })
    }

    /// Φⁿ for n ≥ 0 by repeated squaring with reduction.
    pub fn power(&self, n: u32) -> Automorphism {
        let mut result = Automorphism::identity(self.rank);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.compose(&base).expect("rank preserved");
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base).expect("rank preserved");
            }
        }
        result
    }

    pub fn inverse(&self) -> Result<Automorphism, AutoError> {
        match &self.inverse_images {
            Some(inv) => Ok(Automorphism {
                rank: self.rank,
                images: inv.clone(),
                inverse_images: Some(self.images.clone()),
                name: self.name.as_ref().map(|n| format!("{n}^-1")),
            }),
            None => Err(AutoError::NoInverse(
                self.name.clone().unwrap_or_else(|| "<unnamed>".into()),
            )),
        }
    }

    /// Positive with respect to the basis: every image is a positive word.
    pub fn is_positive(&self) -> bool {
        self.images
            .iter()
            .all(|im| !im.is_empty() && im.letters().iter().all(|l| l.is_positive()))
    }

    pub fn is_identity(&self) -> bool {
        (1..=self.rank).all(|i| {
            self.images[i - 1].letters() == [Letter::positive(i)]
        })
    }

    pub fn max_image_len(&self) -> usize {
        self.images.iter().map(|im| im.len()).max().unwrap_or(0)
    }
}

fn apply_images(images: &[Word], w: &Word) -> Word {
    let mut buf: Vec<Letter> = Vec::with_capacity(w.len() * 2);
    for &l in w.letters() {
        let im = &images[l.index() - 1];
        if l.is_positive() {
            push_reduced(&mut buf, im.letters().iter().copied());
        } else {
            push_reduced(&mut buf, im.letters().iter().rev().map(|x| x.inverse()));
        }
    }
    Word::reduce(buf)
}

fn push_reduced(buf: &mut Vec<Letter>, letters: impl Iterator<Item = Letter>) {
    for l in letters {
        if buf.last().is_some_and(|&last| last == l.inverse()) {
            buf.pop();
        } else {
            buf.push(l);
        }
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Automorphism({}, rank {})",
            self.name.as_deref().unwrap_or("?"),
            self.rank
        )
    }
}

/// Named generators of a subgroup Γ ≤ Out(F).
#[derive(Clone, Debug)]
pub struct GammaAlphabet {
    rank: usize,
    gens: BTreeMap<String, Automorphism>,
}

impl GammaAlphabet {
    pub fn new(gens: Vec<(String, Automorphism)>) -> Result<Self, AutoError> {
        let mut map = BTreeMap::new();
        let mut rank = None;
        for (name, auto) in gens {
            match rank {
                None => rank = Some(auto.rank()),
                Some(r) if r != auto.rank() => {
                    return Err(AutoError::RankMismatch {
                        expected: r,
                        got: auto.rank(),
                    })
                }
                _ => {}
            }
            if map.insert(name.clone(), auto).is_some() {
                return Err(AutoError::DuplicateGenerator(name));
            }
        }
        Ok(GammaAlphabet {
            rank: rank.unwrap_or(0),
            gens: map,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, name: &str) -> Result<&Automorphism, AutoError> {
        self.gens
            .get(name)
            .ok_or_else(|| AutoError::UnknownGenerator(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.gens.keys().map(|s| s.as_str())
    }
}

/// A finite or eventually-periodic sequence of generator names, read as a
/// (claimed) quasigeodesic ray in Γ. Prefixes evaluate to g_n = L₁∘…∘Lₙ.
#[derive(Clone, Debug)]
pub struct GammaRay {
    alphabet: GammaAlphabet,
    head: Vec<String>,
    period: Vec<String>,
}

impl GammaRay {
    pub fn new(
        alphabet: GammaAlphabet,
        head: Vec<String>,
        period: Vec<String>,
    ) -> Result<Self, AutoError> {
        for name in head.iter().chain(period.iter()) {
            alphabet.get(name)?;
        }
        Ok(GammaRay {
            alphabet,
            head,
            period,
        })
    }

    /// Constant ray (g, g, g, …).
    pub fn cyclic(alphabet: GammaAlphabet, name: &str) -> Result<Self, AutoError> {
        alphabet.get(name)?;
        Ok(GammaRay {
            alphabet,
            head: Vec::new(),
            period: vec![name.to_string()],
        })
    }

    pub fn alphabet(&self) -> &GammaAlphabet {
        &self.alphabet
    }

    /// Name of the n-th letter (1-based); None past the end of a finite ray.
    pub fn letter_name(&self, n: usize) -> Option<&str> {
        if n == 0 {
            return None;
        }
        let i = n - 1;
        if i < self.head.len() {
            Some(&self.head[i])
        } else if self.period.is_empty() {
            None
        } else {
            Some(&self.period[(i - self.head.len()) % self.period.len()])
        }
    }

    pub fn is_infinite(&self) -> bool {
        !self.period.is_empty()
    }

    /// A single repeated generator and no head.
    pub fn cyclic_generator(&self) -> Option<&str> {
        if self.head.is_empty() && self.period.len() == 1 {
            Some(&self.period[0])
        } else {
            None
        }
    }

    pub fn evaluator(&self) -> RayEvaluator<'_> {
        RayEvaluator {
            ray: self,
            cache: vec![Automorphism::identity(self.alphabet.rank())],
        }
    }
}

/// Memoized prefix evaluation: extending from g_n to g_{n+1} costs one
/// composition. Exclusive mutation makes this safe per use site.
pub struct RayEvaluator<'a> {
    ray: &'a GammaRay,
    cache: Vec<Automorphism>,
}

impl<'a> RayEvaluator<'a> {
    /// g_n = L₁∘L₂∘…∘Lₙ.
    pub fn automorphism_at(&mut self, n: usize) -> Result<&Automorphism, AutoError> {
        while self.cache.len() <= n {
            let next_idx = self.cache.len();
            let name = self
                .ray
                .letter_name(next_idx)
                .ok_or_else(|| AutoError::UnknownGenerator(format!("<ray index {next_idx}>")))?;
            let gen = self.ray.alphabet.get(name)?;
            let next = self.cache[next_idx - 1].compose(gen)?;
            self.cache.push(next);
        }
        Ok(&self.cache[n])
    }

    /// g_n(h), freely reduced.
    pub fn apply_at(&mut self, n: usize, h: &Word) -> Result<Word, AutoError> {
        let rank = self.ray.alphabet.rank();
        if h.max_index() > rank {
            return Err(AutoError::RankMismatch {
                expected: rank,
                got: h.max_index(),
            });
        }
        Ok(self.automorphism_at(n)?.apply_word(h))
    }
}

/// ‖cyclic_reduce(g_n(h))‖ for n = 0..=n_max.
pub fn ray_length_sequence(
    ray: &GammaRay,
    h: &Word,
    n_max: usize,
) -> Result<Vec<usize>, AutoError> {
    if h.is_empty() {
        return Err(AutoError::TrivialArgument);
    }
    let mut eval = ray.evaluator();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let image = eval.apply_at(n, h)?;
        let (cyc, _) = cyclic_reduce(&image);
        out.push(cyc.map(|c| c.len()).unwrap_or(0));
    }
    Ok(out)
}

/// Finite-horizon growth evidence: the minimum over the trailing `window`
/// entries exceeds `threshold`. Evidence, not a proof of the asymptotic claim.
pub fn grows_without_bound(lengths: &[usize], window: usize, threshold: usize) -> bool {
    if lengths.is_empty() || window == 0 {
        return false;
    }
    let tail_start = lengths.len().saturating_sub(window);
    lengths[tail_start..].iter().all(|&l| l > threshold)
}
