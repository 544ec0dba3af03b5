//! Closed-form solutions of the three sub-SDEs composing the symmetric
//! splitting scheme, expressed in the u = √η·p, α = √η·Ξ parameterization.
//!
//! A: position drift θ += g₁ ⊙ u · fraction and thermostat drift
//!    α += (u ⊙ u − η/β) · fraction; momentum frozen.
//! B: momentum friction decay u = exp(−α · fraction) ⊙ u; θ, α frozen.
//! O: force/noise kick u += −η·g₁ ⊙ f̃ + √(2·g_noise·η^e/β) ⊙ ζ + metric
//!    term; θ, α frozen.
//!
//! Each solution is exact for its own sub-SDE (coefficients are constant
//! while the complementary variables are frozen), so the A-B-O-B-A
//! composition is a weak second-order integrator for the full system.

use crate::core::ParamVector;

use super::SantaError;

/// One entry of the instrumented sub-operation log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubOp {
    AHalf,
    BHalf,
    OFull,
}

/// Sub-SDE A over `fraction` of the step: θ += g1 ⊙ u · fraction, and (in
/// exploration) α += (u ⊙ u − η/β) · fraction.
#[allow(clippy::too_many_arguments)]
pub fn sub_sde_a(
    theta: &mut ParamVector,
    alpha: &mut ParamVector,
    u: &ParamVector,
    g1: &ParamVector,
    eta: f64,
    beta: f64,
    fraction: f64,
    update_alpha: bool,
) {
    let drift = g1.mul(u);
    theta.add_scaled_assign(fraction, &drift);
    if update_alpha {
        let temp = eta / beta;
        for (a, &ui) in alpha.as_mut_slice().iter_mut().zip(u.iter()) {
            *a += (ui * ui - temp) * fraction;
        }
    }
}

/// Sub-SDE B over `fraction` of the step: u = exp(−α · fraction) ⊙ u.
/// An overflowing exponential is reported as divergence.
pub fn sub_sde_b(
    u: &mut ParamVector,
    alpha: &ParamVector,
    fraction: f64,
    step: u64,
) -> Result<(), SantaError> {
    for (ui, &a) in u.as_mut_slice().iter_mut().zip(alpha.iter()) {
        *ui *= (-a * fraction).exp();
    }
    u.ensure_finite("momentum after friction decay")
        .map_err(|_| SantaError::Divergence {
            step,
            what: "momentum friction decay overflowed",
        })?;
    Ok(())
}

/// Optional stochastic pieces of the O kick (exploration only).
pub struct OKick<'a> {
    /// Per-coordinate noise multiplier g (or a pinned constant broadcast).
    pub noise_mult: &'a ParamVector,
    /// Effective η^e already raised to the configured noise exponent.
    pub eta_pow: f64,
    pub zeta: &'a ParamVector,
    /// Metric-gradient approximation term, when enabled.
    pub metric_term: Option<&'a ParamVector>,
}

/// Sub-SDE O over the full step: u += −η·g1 ⊙ f̃, plus, in exploration,
/// √(2·g_noise·η^e/β) ⊙ ζ and the metric term.
pub fn sub_sde_o(
    u: &mut ParamVector,
    g1: &ParamVector,
    f: &ParamVector,
    eta: f64,
    beta: f64,
    kick: Option<OKick<'_>>,
) -> Result<(), SantaError> {
    let force = g1.mul(f);
    u.add_scaled_assign(-eta, &force);
    if let Some(kick) = kick {
        let coeff = 2.0 * kick.eta_pow / beta;
        for ((ui, &gn), &z) in u
            .as_mut_slice()
            .iter_mut()
            .zip(kick.noise_mult.iter())
            .zip(kick.zeta.iter())
        {
            let variance = coeff * gn;
            if variance < 0.0 {
                return Err(SantaError::NegativeNoiseMultiplier);
            }
            *ui += variance.sqrt() * z;
        }
        if let Some(term) = kick.metric_term {
            u.add_assign(term);
        }
    }
    Ok(())
}
