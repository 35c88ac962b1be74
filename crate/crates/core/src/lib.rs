//! Weighted Event Calculus rule inference and online learning.
//!
//! The crate follows a simple pipeline: event streams are parsed into
//! time-windowed [`interp::Interpretation`]s, a weighted theory of
//! initiation/termination rules is evaluated against them with exact MAP
//! inference ([`map`]), and the online learner ([`learner`]) revises the
//! theory from its own prediction mistakes: new rules are induced from
//! bottom rules ([`induction`]), weights are updated with AdaGrad
//! ([`weights`]) and rules are specialized down a subsumption lattice under
//! Hoeffding tests ([`specialize`]).
//!
//! Numeric kernels (weight updates, gain scores, metrics) are generic over
//! the scalar type via `num_traits::Float`; the crate-level [`Weight`]
//! alias fixes the concrete type used by rules and the learner.

pub mod induction;
pub mod interp;
pub mod kernel;
pub mod lang;
pub mod learner;
pub mod logic;
pub mod map;
pub mod metrics;
pub mod modes;
pub mod specialize;
pub mod synthetic;
pub mod weights;

/// Scalar type used for rule weights and hyperparameters.
pub type Weight = f64;

/// Discrete time points of the event stream.
pub type Time = i64;
