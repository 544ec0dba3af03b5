//! Santa: an annealed stochastic-gradient MCMC method that starts out as a
//! posterior sampler (exploration) and anneals into a stochastic optimizer
//! (refinement), with adaptive RMSprop-style preconditioning and per-coordinate
//! momentum weights.
//!
//! The crate bundles:
//!
//! - [`core`]: dense parameter vectors, annealing/step-size schedules, and the
//!   deterministic randomness contract shared by every stepper.
//! - [`santa`]: the Santa optimizer itself, in both an Euler discretization and
//!   a symmetric-splitting (A-B-O-B-A) discretization built from closed-form
//!   sub-SDE solutions.
//! - [`baselines`]: SGD, SGD with momentum, SGLD, mSGNHT, RMSprop, and Adam as
//!   independent steppers sharing the same objective/randomness contracts.
//! - [`objectives`]: potentials with analytic gradients (double-well,
//!   quadratic, a small ReLU MLP classifier) plus an IDX-format data loader.
//! - [`diagnostics`]: independent oracles — finite-difference gradient checks,
//!   stationary-moment tests, basin-escape statistics, integrator bias.
//! - [`harness`]: flat-file experiment configuration, orchestration, and
//!   deterministic CSV trace output behind the `santa-opt` CLI.

// Validation guards use `!(x > 0.0)` on purpose: unlike `x <= 0.0` the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod core;
pub mod diagnostics;
pub mod harness;
pub mod objectives;
pub mod santa;
