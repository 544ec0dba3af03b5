//! Optimizer state and initialization.

use crate::core::{NoiseSource, ParamVector};

use super::config::SantaConfig;
use super::SantaError;

/// The two phases of a run: annealed sampling, then zero-temperature
/// optimization. The stage flips exactly once, at the burn-in step, and
/// never reverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Exploration,
    Refinement,
}

impl Stage {
    pub fn tag(self) -> &'static str {
        match self {
            Stage::Exploration => "E",
            Stage::Refinement => "R",
        }
    }
}

/// Full optimizer state.
///
/// Invariants maintained by the steppers: `v` is element-wise non-negative,
/// `g_prev` element-wise positive, and `stage == Exploration` iff
/// `t < burnin`.
#[derive(Debug, Clone)]
pub struct SantaState {
    pub theta: ParamVector,
    /// Momentum u_t (the scaled momentum u = √η·p).
    pub u: ParamVector,
    /// Per-coordinate thermostat α_t.
    pub alpha: ParamVector,
    /// Second-moment accumulator v_t ≥ 0.
    pub v: ParamVector,
    /// Preconditioner from the previous step, g_{t-1} > 0. At t = 0 it holds
    /// a placeholder of ones; the first step substitutes g_1 for it.
    pub g_prev: ParamVector,
    /// Completed step count.
    pub t: u64,
    pub stage: Stage,
}

impl SantaState {
    /// Number of parameters.
    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub(crate) fn stage_for(t: u64, burnin: u64) -> Stage {
        if t < burnin {
            Stage::Exploration
        } else {
            Stage::Refinement
        }
    }
}

/// Initializes state at θ₀ = 0: u₀ = √η₁·ζ with ζ ~ N(0, I), α₀ = √η₁·C·1,
/// v₀ = 0, t = 0, exploration stage.
pub fn init_state(
    p: usize,
    cfg: &SantaConfig,
    noise: &mut dyn NoiseSource,
) -> Result<SantaState, SantaError> {
    init_state_from(ParamVector::zeros(p), cfg, noise)
}

/// Initializes state at a caller-supplied θ₀.
pub fn init_state_from(
    theta0: ParamVector,
    cfg: &SantaConfig,
    noise: &mut dyn NoiseSource,
) -> Result<SantaState, SantaError> {
    cfg.validate()?;
    let p = theta0.len();
    let sqrt_eta1 = cfg.step.eta_at(1)?.sqrt();
    let u = noise.gaussian_vector(p).scale(sqrt_eta1);
    let alpha = ParamVector::constant(p, sqrt_eta1 * cfg.c0);
    Ok(SantaState {
        theta: theta0,
        u,
        alpha,
        v: ParamVector::zeros(p),
        g_prev: ParamVector::ones(p),
        t: 0,
        stage: SantaState::stage_for(0, cfg.burnin),
    })
}
