//! Depth-k languages of the translated laminations φⁿ·L(T_ψ).
//!
//! Direct padded application of φⁿ needs input depth growing like λⁿ, which
//! is unusable past a few steps. Instead the leaves are pushed forward
//! through their depth-2 skeleton: every leaf of the ψ-dual lamination is a
//! concatenation of letters whose adjacent pairs lie in the depth-2 language
//! P₂, and for the positive maps in play φⁿ cancels nothing on those leaves
//! (sign-pure runs never cancel under a positive map, and the lone
//! sign-change junction of a special leaf keeps distinct initial letters on
//! both sides). Every depth-k factor of φⁿ(leaf) therefore lives inside
//! φⁿ(x·y) for an adjacent pair x·y, provided each letter image has length
//! ≥ k. All of this is asserted at runtime, not assumed: any cancellation or
//! short image aborts the run, and the n ≤ 2 terms are cross-checked against
//! the padded route.

use anyhow::{bail, ensure, Context, Result};
use lamlab_core::lamlang::{
    apply_automorphism, collect_windows, dual_lamination_segments, padding_for,
};
use lamlab_core::words::Letter;
use lamlab_core::{Automorphism, LamApprox, RoseMap, Word};

fn prefix(w: &Word, j: usize) -> Word {
    w.factor(0, j.min(w.len()))
}

fn suffix(w: &Word, j: usize) -> Word {
    let j = j.min(w.len());
    w.factor(w.len() - j, j)
}

/// Prefix of fⁿ(d) for an oriented direction, given the positive images.
fn prefix_of_direction(images: &[Word], d: Letter, j: usize) -> Word {
    let base = &images[d.index() - 1];
    if d.is_positive() {
        prefix(base, j)
    } else {
        suffix(base, j).inverse()
    }
}

fn suffix_of_direction(images: &[Word], d: Letter, j: usize) -> Word {
    let base = &images[d.index() - 1];
    if d.is_positive() {
        suffix(base, j)
    } else {
        prefix(base, j).inverse()
    }
}

/// The sequence of depth-k languages Lₙ = φⁿ·L(T_ψ) for n = 0..=n_max.
pub struct PushforwardSequence {
    pub terms: Vec<LamApprox>,
    /// Human-readable notes from the internal consistency checks.
    pub validations: Vec<String>,
}

pub fn pushforward_sequence(
    phi: &Automorphism,
    psi_map: &RoseMap,
    k: usize,
    n_max: usize,
    lbfh_horizon: usize,
) -> Result<PushforwardSequence> {
    ensure!(k >= 2, "pushforward sequence needs depth at least 2");
    ensure!(phi.is_positive(), "pipeline requires a positive automorphism");
    let rank = phi.rank();
    let base = dual_lamination_segments(psi_map, k, lbfh_horizon, true)
        .context("base dual lamination")?;
    let skeleton = dual_lamination_segments(psi_map, 2, lbfh_horizon, true)
        .context("depth-2 leaf skeleton")?;

    let mut validations = Vec::new();
    let mut terms = vec![base];

    // positive edge images of φⁿ, updated in place
    let mut images: Vec<Word> = (1..=rank)
        .map(|i| Word::letter(Letter::positive(i)))
        .collect();

    for n in 1..=n_max {
        for im in images.iter_mut() {
            *im = phi.apply(im).context("iterating images")?;
        }
        let min_len = images.iter().map(|w| w.len()).min().unwrap_or(0);
        if min_len < k {
            // short images cannot yet cover a window across two blocks;
            // fall back to the padded route for this term
            let pow = phi.power(n as u32);
            let padded = dual_lamination_segments(psi_map, padding_for(&pow, k), lbfh_horizon, true)?;
            terms.push(apply_automorphism(&padded, &pow, k)?);
            validations.push(format!("n={n}: padded route (min image length {min_len} < {k})"));
            continue;
        }

        let mut segments = std::collections::BTreeSet::new();
        // interior windows of the letter images (flips via the inverse word)
        for im in &images {
            collect_windows(im.letters(), k, &mut segments);
            collect_windows(im.inverse().letters(), k, &mut segments);
        }
        // junction windows across every adjacent pair of the leaf skeleton
        for pair in skeleton.segments() {
            let (x, y) = (pair.letters()[0], pair.letters()[1]);
            let s = suffix_of_direction(&images, x, k - 1);
            let p = prefix_of_direction(&images, y, k - 1);
            let junction = s.concat(&p);
            if junction.len() != 2 * (k - 1) {
                bail!(
                    "cancellation at the image of pair {pair}: the positivity \
                     invariant of the pushforward pipeline is violated"
                );
            }
            collect_windows(junction.letters(), k, &mut segments);
            collect_windows(junction.inverse().letters(), k, &mut segments);
        }
        let term = LamApprox::try_new(rank, k, segments)
            .context("pushforward term failed lamination validation")?;

        // anchor the skeleton route to the padded route while that is cheap
        if n <= 2 {
            let pow = phi.power(n as u32);
            let padded =
                dual_lamination_segments(psi_map, padding_for(&pow, k), lbfh_horizon, true)?;
            let direct = apply_automorphism(&padded, &pow, k)?;
            ensure!(
                term == direct,
                "skeleton pushforward disagrees with padded application at n={n}"
            );
            validations.push(format!("n={n}: skeleton route matches padded route"));
        }
        terms.push(term);
    }
    Ok(PushforwardSequence { terms, validations })
}
