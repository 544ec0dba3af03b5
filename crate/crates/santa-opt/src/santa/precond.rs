//! RMSprop-style adaptive preconditioner and the metric-gradient
//! approximation term.

use crate::core::ParamVector;

use super::SantaError;

/// One preconditioner update:
///
///   v' = σ·v + ((1-σ)/N²)·f̃ ⊙ f̃
///   g' = 1 ⊘ √(λ + √v')
///
/// Preserves v' ≥ 0 and g' ∈ (0, 1/√λ].
pub fn preconditioner_update(
    v: &ParamVector,
    f: &ParamVector,
    sigma: f64,
    lambda: f64,
    n_data: usize,
) -> Result<(ParamVector, ParamVector), SantaError> {
    f.ensure_finite("stochastic gradient")?;
    let w = (1.0 - sigma) / (n_data as f64 * n_data as f64);
    let v_new = v.zip_map(f, |vi, fi| sigma * vi + w * fi * fi);
    v_new.ensure_finite("second-moment accumulator")?;
    let g_new = v_new.map(|vi| 1.0 / (lambda + vi.sqrt()).sqrt());
    debug_assert!(v_new.iter().all(|&x| x >= 0.0));
    debug_assert!(g_new.iter().all(|&x| x > 0.0));
    Ok((v_new, g_new))
}

/// The approximation to the metric-gradient contribution,
/// (η/β)·(1 − g_prev ⊘ g) ⊘ u, with each |u_i| clamped to at least `guard`
/// (sign preserved, u_i = 0 treated as +guard) so the division cannot blow
/// up.
pub fn metric_grad_term(
    g: &ParamVector,
    g_prev: &ParamVector,
    u: &ParamVector,
    eta: f64,
    beta: f64,
    guard: f64,
) -> ParamVector {
    let coeff = eta / beta;
    let ratio = g_prev.zip_map(g, |p, c| 1.0 - p / c);
    ratio.zip_map(u, |r, ui| {
        let guarded = if ui == 0.0 {
            guard
        } else {
            ui.signum() * ui.abs().max(guard)
        };
        coeff * r / guarded
    })
}
