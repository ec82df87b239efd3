//! Möbius values over square-free numbers, the restricted Mertens walk they
//! generate, and the statistical machinery used to test that walk for
//! randomness.
//!
//! The crate is organised bottom-up:
//!
//! * [`seqgen`] sieves μ over integer windows, indexes square-free numbers by
//!   ordinal and stores the restricted sequence `S_n = (μ̂(n) + 1) / 2`.
//! * [`numth`] holds the number-theoretic oracles (prime counts along the
//!   square-free numbers, ω statistics, primorials, class counts).
//! * [`mertens`] builds block ensembles and moment diagnostics.
//! * [`statcore`] provides special functions and P-value bookkeeping.
//! * [`battery`] implements the randomness tests and their orchestration.
//! * [`extremes`] covers the arcsine and max/min separation laws.
//! * [`dirichlet`] covers characters mod a prime and twisted Mertens sums.
//!
//! With the default `parallel` feature, independent segments and blocks are
//! processed on the rayon pool. Without it every loop runs sequentially and
//! produces identical output.

pub mod battery;
pub mod dirichlet;
mod error;
pub mod extremes;
pub mod mertens;
pub mod numth;
pub mod par;
pub mod rng;
pub mod seqgen;
pub mod statcore;

pub use error::{Error, Result};
