//! Exact and empirical machinery around collisions of binary and
//! ternary digit sums.
//!
//! A *collision* is a nonnegative integer `n` whose binary digit sum
//! equals its ternary digit sum, `s2(n) = s3(n)` (OEIS A037301). This
//! crate provides the pieces needed to enumerate, analyze, and
//! manufacture such integers:
//!
//! * [`digits`] — digit-sum kernels (full and truncated) in arbitrary
//!   bases, block counting, and the Kummer-style binomial valuation
//!   identities;
//! * [`distribution`] — the exact distribution of truncated digit-sum
//!   differences, its characteristic function, and moment recurrences;
//! * [`constructor`] — residue classes `L + 2^nu 3^beta N` on which
//!   `f(n) = s2(n) - s3(n)` responds to a family of shifts `d_j` by
//!   prescribed constants, plus the rarefied progression that
//!   concentrates `f` near zero;
//! * [`collider`] — high-throughput enumeration of collisions,
//!   pattern searches, and the collision factory that assembles
//!   explicit very large collisions with replayable certificates;
//! * [`analysis`] — Monte-Carlo and exact checks: concentration,
//!   fair-share ratios, exponential-sum orthogonality, Hoeffding
//!   tails, joint residue counts, and density-exponent fits.
//!
//! The `collider` binary in the companion CLI crate exposes all of
//! this on the command line.

pub mod analysis;
pub mod collider;
pub mod constructor;
pub mod digits;
pub mod distribution;
pub mod error;
pub mod serde_util;

pub use digits::{BigNat, DigitString};
pub use error::{Error, Result};
