//! # entropy-lab
//!
//! A computational laboratory for measure-theoretic entropy on countable
//! topological Markov shifts.
//!
//! Countable shifts are handled through a schedule of finite truncations
//! `{0..m-1}`; every exponential enumeration runs on one truncation and the
//! schedule is exposed so convergence can be studied directly.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`shift`] | alphabets, transition structures, words, the `d_θ` metric, ball/cylinder dictionary |
//! | [`measure`] | Bernoulli, Markov, periodic-orbit and mixture measures with exact log-scale cylinder masses |
//! | [`potential`] | locally constant potentials and Birkhoff sums |
//! | [`thermo`] | transfer-operator pressure, RPF equilibria, Gibbs certificates, constrained pressure |
//! | [`entropy`] | closed-form, plug-in and Katok minimal-cover entropy; SMB and Birkhoff sampling |
//! | [`suspension`] | roof functions, Abramov entropy, flow-level semicontinuity bookkeeping |
//! | [`experiments`] | batch experiments behind the `entropy-lab` binary |
//!
//! All masses are handled in natural-log space; entropies are in nats.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod entropy;
pub mod error;
pub mod experiments;
pub mod logspace;
pub mod measure;
pub mod potential;
pub mod shift;
pub mod suspension;
pub mod thermo;

mod linalg;

pub use error::{Error, Result};
pub use measure::{ProperWeight, ShiftMeasure};
pub use potential::Potential;
pub use shift::{Alphabet, MetricParams, Symbol, TransitionStructure, Word};
