//! Core of a desk-scale laboratory for verification-augmented group-relative
//! policy optimization applied to video anomaly reasoning.
//!
//! The crate is `no_std` (it only needs `alloc`). Everything here is a pure
//! function of its inputs and an explicit RNG; file formats, the HTTP judge
//! and the command-line front end live in the `varlab` companion crate.
//!
//! Module map:
//!
//! - [`corpus`]: synthetic anomaly videos, temporal intervals, trimming and
//!   frame sampling, and the weak-label view consumed by reinforcement learning.
//! - [`cot`]: the perception-to-cognition reasoning document, its tag grammar,
//!   parser, serializer and verdict extraction.
//! - [`policy`]: a factorized stochastic policy with exact log-probabilities
//!   and analytic gradients, surface rendering, and supervised pre-fitting.
//! - [`avagrpo`]: the reward stack, group-relative advantages, the KL
//!   estimator, the single-update objective and the training loop.
//! - [`eval`]: classification, temporal grounding and text metrics, and the
//!   judge rubric.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod avagrpo;
pub mod corpus;
pub mod cot;
pub mod eval;
pub mod math;
pub mod policy;
pub mod rng;

pub use corpus::{Category, Label, SyntheticVideo, TemporalInterval};
pub use cot::{CoTDocument, Verdict};
pub use policy::{PolicyConfig, PolicyParams};
