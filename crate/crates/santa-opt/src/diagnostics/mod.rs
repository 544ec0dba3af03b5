//! Independent oracles and statistical tests: finite-difference gradient
//! checks, stationary-moment tests against analytically known targets,
//! basin-escape statistics on the double-well, and weak-accuracy bias
//! comparison between the two integrators.

mod basin;
mod bias;
mod gradcheck;
mod moments;
mod roots;

pub use basin::{basin_escape, BasinOptimizer, BasinOutcome, BasinReport};
pub use bias::{integrator_bias, BiasPoint};
pub use gradcheck::grad_check;
pub use moments::{
    moment_test, sampler_for, MomentAccumulator, MomentReport, Sampler, SamplerSpec,
    MEAN_TOLERANCE, VARIANCE_TOLERANCE,
};
pub use roots::{bisect_root, double_well_minima, DoubleWellRoots};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("sampling diverged: {0}")]
    Divergence(String),
    #[error(transparent)]
    Santa(#[from] crate::santa::SantaError),
    #[error(transparent)]
    Baseline(#[from] crate::baselines::BaselineError),
    #[error(transparent)]
    Objective(#[from] crate::objectives::ObjectiveError),
    #[error(transparent)]
    Core(#[from] crate::core::CoreError),
}
