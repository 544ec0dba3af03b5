//! The Santa optimizer: an annealed thermostat sampler that becomes a
//! deterministic adaptive-momentum optimizer in the zero-temperature limit.
//!
//! Two discretizations are provided. The Euler scheme applies all updates
//! first-order in the stepsize; the symmetric splitting scheme (SSS) composes
//! exactly-solved sub-SDEs in palindromic A-B-O-B-A order for weak
//! second-order accuracy. Both share the preconditioner recipe, the
//! exploration/refinement staging at `burnin`, and the divergence policy
//! (any non-finite state aborts the run with the offending step index).

mod config;
mod precond;
mod run;
mod state;
mod step;
mod subsde;

pub use config::{NoiseExponent, NoiseG, SantaConfig, Scheme};
pub use precond::{metric_grad_term, preconditioner_update};
pub use run::{run, run_with_noise, CollectSink, NullSink, TraceSink};
pub use state::{init_state, init_state_from, SantaState, Stage};
pub use step::{euler_step, sss_step, sss_step_logged, step, StepReport};
pub use subsde::{sub_sde_a, sub_sde_b, sub_sde_o, OKick, SubOp};

use crate::core::CoreError;
use crate::objectives::ObjectiveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SantaError {
    #[error("divergence at step {step}: {what}")]
    Divergence { step: u64, what: &'static str },
    #[error("non-finite stochastic gradient at step {step}")]
    BadGradient { step: u64 },
    #[error("negative noise multiplier in O sub-step")]
    NegativeNoiseMultiplier,
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}
