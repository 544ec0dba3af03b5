//! The two Santa update schemes.
//!
//! Per-step randomness consumption order: the gradient source draws first
//! (minibatch indices, if any), then — in exploration only — one standard
//! normal per coordinate for the injected noise.

use crate::core::{NoiseSource, ParamVector};
use crate::objectives::GradientSource;

use super::config::{NoiseG, SantaConfig};
use super::precond::{metric_grad_term, preconditioner_update};
use super::state::{SantaState, Stage};
use super::subsde::{sub_sde_a, sub_sde_b, sub_sde_o, OKick, SubOp};
use super::SantaError;

/// Scalar summary of one step, suitable for trace rows.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub t: u64,
    pub stage: Stage,
    pub beta: f64,
    pub eta: f64,
    pub grad_norm: f64,
    pub u_norm: f64,
    pub alpha_mean: f64,
    pub g_min: f64,
    pub g_max: f64,
}

struct StepContext {
    t: u64,
    stage: Stage,
    eta: f64,
    beta: f64,
    u_value: f64,
    f: ParamVector,
    g: ParamVector,
    grad_norm: f64,
}

/// Shared prologue: schedules, gradient, preconditioner, stage.
fn prepare_step<G: GradientSource + ?Sized>(
    state: &mut SantaState,
    source: &mut G,
    cfg: &SantaConfig,
    noise: &mut dyn NoiseSource,
) -> Result<StepContext, SantaError> {
    let t = state.t + 1;
    let eta = cfg.step.eta_at(t)?;
    let beta = cfg.anneal.beta_at(t)?;
    // A gradient overflowing on a finite-but-huge θ is a divergence of the
    // run, reported with the step index like any other blow-up.
    let (u_value, f) = source.eval(t, &state.theta, noise).map_err(|e| match e {
        crate::objectives::ObjectiveError::Core(crate::core::CoreError::NonFinite { .. }) => {
            SantaError::BadGradient { step: t }
        }
        other => SantaError::Objective(other),
    })?;
    if !f.is_finite() {
        return Err(SantaError::BadGradient { step: t });
    }
    let (v_new, mut g) = preconditioner_update(&state.v, &f, cfg.sigma, cfg.lambda, cfg.n_data)
        .map_err(|e| match e {
            SantaError::Core(crate::core::CoreError::NonFinite { .. }) => SantaError::Divergence {
                step: t,
                what: "second-moment accumulator became non-finite",
            },
            other => other,
        })?;
    state.v = v_new;
    if let Some(pin) = cfg.g_pin {
        g = ParamVector::constant(state.dim(), pin);
    }
    let grad_norm = f.norm();
    Ok(StepContext {
        t,
        stage: SantaState::stage_for(t, cfg.burnin),
        eta,
        beta,
        u_value,
        f,
        g,
        grad_norm,
    })
}

/// The effective g_{t-1}: on the very first step the freshly computed g_t
/// stands in, avoiding the pathological 1/√λ placeholder in the first
/// noise/metric terms.
fn g_prev_effective<'a>(state: &'a SantaState, g: &'a ParamVector) -> &'a ParamVector {
    if state.t == 0 {
        g
    } else {
        &state.g_prev
    }
}

fn finish_step(
    state: &mut SantaState,
    ctx: StepContext,
    u_new: ParamVector,
    cfg: &SantaConfig,
) -> Result<(StepReport, f64), SantaError> {
    state.u = u_new;
    state
        .theta
        .ensure_finite("theta")
        .map_err(|_| SantaError::Divergence {
            step: ctx.t,
            what: "theta became non-finite",
        })?;
    state
        .u
        .ensure_finite("momentum")
        .map_err(|_| SantaError::Divergence {
            step: ctx.t,
            what: "momentum became non-finite",
        })?;
    let report = StepReport {
        t: ctx.t,
        stage: ctx.stage,
        beta: ctx.beta,
        eta: ctx.eta,
        grad_norm: ctx.grad_norm,
        u_norm: state.u.norm(),
        alpha_mean: state.alpha.mean(),
        g_min: ctx.g.min(),
        g_max: ctx.g.max(),
    };
    state.g_prev = ctx.g;
    state.t = ctx.t;
    state.stage = SantaState::stage_for(state.t, cfg.burnin);
    Ok((report, ctx.u_value))
}

/// One first-order (Euler-scheme) Santa step. Returns the step report and
/// the objective value Ũ seen by the step.
pub fn euler_step<G: GradientSource + ?Sized>(
    state: &mut SantaState,
    source: &mut G,
    cfg: &SantaConfig,
    noise: &mut dyn NoiseSource,
) -> Result<(StepReport, f64), SantaError> {
    let ctx = prepare_step(state, source, cfg, noise)?;
    let p = state.dim();
    let mut u_new = ParamVector::zeros(p);

    if ctx.stage == Stage::Exploration {
        let temp = ctx.eta / ctx.beta;
        for (a, &ui) in state.alpha.as_mut_slice().iter_mut().zip(state.u.iter()) {
            *a += ui * ui - temp;
        }
        if cfg.include_metric_grad_term {
            let g_prev = g_prev_effective(state, &ctx.g);
            u_new.add_assign(&metric_grad_term(
                &ctx.g,
                g_prev,
                &state.u,
                ctx.eta,
                ctx.beta,
                cfg.u_guard,
            ));
        }
        let zeta = noise.gaussian_vector(p);
        let coeff = 2.0 * cfg.noise_exponent.apply(ctx.eta) / ctx.beta;
        match cfg.noise_g {
            NoiseG::UsePrevG => {
                let g_prev = g_prev_effective(state, &ctx.g);
                for ((un, &gp), &z) in u_new
                    .as_mut_slice()
                    .iter_mut()
                    .zip(g_prev.iter())
                    .zip(zeta.iter())
                {
                    *un += (coeff * gp).sqrt() * z;
                }
            }
            NoiseG::FixedConstant(c) => {
                let amp = (coeff * c).sqrt();
                u_new.add_scaled_assign(amp, &zeta);
            }
        }
    }
    // Shared tail of both stages: u_t += (1 − α_t) ⊙ u_{t-1} − η·g_t ⊙ f̃_t,
    // then θ_t = θ_{t-1} + g_t ⊙ u_t.
    for i in 0..p {
        u_new[i] += (1.0 - state.alpha[i]) * state.u[i] - ctx.eta * ctx.g[i] * ctx.f[i];
    }
    for i in 0..p {
        state.theta[i] += ctx.g[i] * u_new[i];
    }
    finish_step(state, ctx, u_new, cfg)
}

/// One symmetric-splitting Santa step: sub-SDEs applied in the palindromic
/// order A½ B½ O B½ A½, with the thermostat halves living inside the A
/// blocks (exploration only).
pub fn sss_step<G: GradientSource + ?Sized>(
    state: &mut SantaState,
    source: &mut G,
    cfg: &SantaConfig,
    noise: &mut dyn NoiseSource,
) -> Result<(StepReport, f64), SantaError> {
    sss_step_logged(state, source, cfg, noise, None)
}

/// [`sss_step`] with an optional log capturing the sub-operation order.
pub fn sss_step_logged<G: GradientSource + ?Sized>(
    state: &mut SantaState,
    source: &mut G,
    cfg: &SantaConfig,
    noise: &mut dyn NoiseSource,
    mut log: Option<&mut Vec<SubOp>>,
) -> Result<(StepReport, f64), SantaError> {
    let ctx = prepare_step(state, source, cfg, noise)?;
    let p = state.dim();
    let exploring = ctx.stage == Stage::Exploration;
    let push = |log: &mut Option<&mut Vec<SubOp>>, op: SubOp| {
        if let Some(log) = log.as_deref_mut() {
            log.push(op);
        }
    };

    // Noise and metric terms are built from u_{t-1} and g_{t-1} before any
    // sub-step touches the state.
    let metric = if exploring && cfg.include_metric_grad_term {
        let g_prev = g_prev_effective(state, &ctx.g);
        Some(metric_grad_term(
            &ctx.g,
            g_prev,
            &state.u,
            ctx.eta,
            ctx.beta,
            cfg.u_guard,
        ))
    } else {
        None
    };
    let noise_parts = if exploring {
        let zeta = noise.gaussian_vector(p);
        let mult = match cfg.noise_g {
            NoiseG::UsePrevG => g_prev_effective(state, &ctx.g).clone(),
            NoiseG::FixedConstant(c) => ParamVector::constant(p, c),
        };
        Some((mult, zeta))
    } else {
        None
    };

    let mut u = state.u.clone();

    push(&mut log, SubOp::AHalf);
    sub_sde_a(
        &mut state.theta,
        &mut state.alpha,
        &u,
        &ctx.g,
        ctx.eta,
        ctx.beta,
        0.5,
        exploring,
    );

    push(&mut log, SubOp::BHalf);
    sub_sde_b(&mut u, &state.alpha, 0.5, ctx.t)?;

    push(&mut log, SubOp::OFull);
    let kick = noise_parts.as_ref().map(|(mult, zeta)| OKick {
        noise_mult: mult,
        eta_pow: cfg.noise_exponent.apply(ctx.eta),
        zeta,
        metric_term: metric.as_ref(),
    });
    sub_sde_o(&mut u, &ctx.g, &ctx.f, ctx.eta, ctx.beta, kick)?;

    push(&mut log, SubOp::BHalf);
    sub_sde_b(&mut u, &state.alpha, 0.5, ctx.t)?;

    push(&mut log, SubOp::AHalf);
    sub_sde_a(
        &mut state.theta,
        &mut state.alpha,
        &u,
        &ctx.g,
        ctx.eta,
        ctx.beta,
        0.5,
        exploring,
    );

    finish_step(state, ctx, u, cfg)
}

/// Dispatches on the configured scheme.
pub fn step<G: GradientSource + ?Sized>(
    state: &mut SantaState,
    source: &mut G,
    cfg: &SantaConfig,
    noise: &mut dyn NoiseSource,
) -> Result<(StepReport, f64), SantaError> {
    match cfg.scheme {
        super::config::Scheme::Euler => euler_step(state, source, cfg, noise),
        super::config::Scheme::Sss => sss_step(state, source, cfg, noise),
    }
}
