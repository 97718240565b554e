//! Packings of lines in real and complex projective space.
//!
//! A packing is stored as a [`UnitFrame`]: `n` unit vectors in `F^d`, where
//! `F` is either the reals or the complex numbers. The quality of a packing is
//! its coherence, the largest modulus of an inner product between two distinct
//! vectors. This crate provides:
//!
//! - [`analysis`]: coherence, angle profiles, tightness, equiangularity and
//!   spanning checks, bundled into a [`Certificate`].
//! - [`bounds`]: Gerzon's bound and the Bukh–Cox, Welch, orthoplex and
//!   Levenstein lower bounds on coherence, plus saturation classification.
//! - [`constructions`]: simplices, maximal sets of mutually unbiased bases in
//!   prime dimension, Naimark complements, and vector removal.
//! - [`optimizer`]: multi-restart smoothed-max descent with alternating
//!   projection polish.
//! - [`catalog`]: the plain-text packing format and an on-disk leaderboard of
//!   best known packings.

pub mod analysis;
pub mod bounds;
pub mod catalog;
pub mod constructions;
mod error;
pub mod frame;
pub(crate) mod linalg;
pub mod optimizer;

pub use analysis::{Certificate, CertifyOptions};
pub use bounds::{BoundKind, BoundReport};
pub use error::{Error, ParseKind, Result};
pub use frame::{Field, GramMatrix, UnitFrame};

/// Complex scalar used for all frame entries.
pub type C64 = nalgebra::Complex<f64>;
