//! Computing with free-group automorphisms, train-track maps on the rose,
//! and finite-depth approximations of algebraic laminations.
//!
//! The crate is organized around five concerns:
//!
//! - [`words`]: exact word algebra over a fixed free basis: free and cyclic
//!   reduction, canonical conjugacy representatives, subword queries.
//! - [`autos`]: automorphisms given by basis images, composition and powers,
//!   rays over a named generating set, and length-growth sequences.
//! - [`traintrack`]: rose self-maps as train-track representatives:
//!   direction dynamics, turn legality, transition matrices with
//!   Perron-Frobenius data, eigenrays, attracting fixed rays.
//! - [`lamlang`]: depth-k leaf-segment languages: iterated-image factors,
//!   special-leaf classes, Mitra's recurrent-segment construction, Chabauty
//!   comparison, sign census.
//! - [`outerspace`]: marked metric roses: class lengths, Lipschitz
//!   distortion brackets, flaring checks, stable-length functionals, and
//!   brute-force dual laminations.
//!
//! All values are immutable after construction and all operations are pure,
//! so everything here is safe for unrestricted concurrent use; the only
//! interior mutability is the monotone eigenray prefix cache, which carries
//! its own lock.

pub mod autos;
pub mod config;
pub mod lamlang;
pub mod outerspace;
pub mod sampling;
pub mod traintrack;
pub mod words;

pub use autos::{Automorphism, GammaAlphabet, GammaRay};
pub use lamlang::LamApprox;
pub use outerspace::{MarkedRose, MetricRose, StableLengthFunctional};
pub use traintrack::{PfData, RoseMap, TransitionMatrix};
pub use words::{CyclicWord, Letter, Word};

/// Version tag mixed into cache keys so stale artifacts never survive a
/// module revision.
pub const MODULE_VERSION: &str = env!("CARGO_PKG_VERSION");
