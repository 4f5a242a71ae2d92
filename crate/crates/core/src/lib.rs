//! Executable machinery for ultradifferentiable function classes.
//!
//! The crate works with three kinds of weights and decides, at a finite
//! truncation, the growth conditions that characterize stability of the
//! associated Denjoy–Carleman type classes under composition, inversion,
//! reciprocals and ODE solving:
//!
//! - [`seq::WeightSequence`]: a weight sequence `M = (M_k)` stored as
//!   natural logarithms, optionally backed by a closed form that can be
//!   evaluated at astronomically large indices.
//! - [`weight_fn::WeightFunction`]: a weight function `ω` carried through the
//!   convex piecewise-linear function `φ(t) = ω(e^t)` and its exact Young
//!   conjugate.
//! - [`matrix::WeightMatrix`]: a finite ordered family of weight sequences.
//!
//! Conditions quantified as "there is a constant C for all k" cannot be
//! decided from finite data; every checker returns a three-valued
//! [`verdict::Verdict`] built from a statistic tracked over geometric
//! checkpoints.
//!
//! The [`bounds`] module turns field/function bounds into derivative-bound
//! certificates, and [`jet`] supplies exact truncated Taylor arithmetic that
//! serves as ground truth for those certificates.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod fdb;
pub mod jet;
pub mod matrix;
pub mod numeric;
pub mod seq;
pub mod verdict;
pub mod weight_fn;

pub use error::{Error, Result};
pub use numeric::{Scalar, SeqIndex};
pub use seq::WeightSequence;
pub use verdict::{CheckConfig, Status, Verdict};
