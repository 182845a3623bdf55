//! Exact regret analysis of Thompson sampling on adversarial bit sequences.
//!
//! The predictor keeps Beta posterior counts over the bits seen so far, draws
//! `x_t ~ beta(O+1, Z+1)`, and predicts 1 iff `x_t > q`, where `q` sets the
//! false-positive/false-negative trade-off. Because the per-step error
//! probability is a Beta CDF value, the expected regret of any fixed bit
//! sequence is computable in closed form — exactly, with rational arithmetic,
//! or fast in floating point via CDF recurrences.
//!
//! The crate provides:
//!
//! - [`beta_math`]: Beta/Binomial CDF identities, incremental recurrences,
//!   tail sums, and Stirling-based pmf bounds.
//! - [`prediction`]: bit sequences, exact and float regret engines, and the
//!   closed-form effect of swapping adjacent bits.
//! - [`sequences`]: constructive generators for worst-case and best-case
//!   sequences of a given length and zero count.
//! - [`oracle`]: exhaustive exact-rational enumeration that certifies the
//!   extremal characterizations and the swapping rule at small lengths.
//! - [`mc`]: seeded Monte-Carlo replay of the algorithm for end-to-end
//!   validation of the exact engines.
//! - [`experiments`]: scaling sweeps and deterministic CSV output.

pub mod beta_math;
pub mod error;
pub mod experiments;
pub mod mc;
pub mod oracle;
pub mod prediction;
pub mod sequences;

pub use error::Error;
pub use prediction::{BitSequence, Mode, TradeoffParameter};
