//! Central finite-difference gradient verification.

use crate::core::ParamVector;
use crate::objectives::Objective;

use super::DiagnosticsError;

/// Compares the objective's analytic full-data gradient against central
/// differences with the given step, returning the maximum over coordinates
/// of |analytic − numeric| / max(1, |analytic|).
pub fn grad_check(
    objective: &dyn Objective,
    theta: &ParamVector,
    step: f64,
) -> Result<f64, DiagnosticsError> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let (_, analytic) = objective.eval_full(theta)?;
    let mut worst = 0.0f64;
    let mut probe = theta.clone();
    for i in 0..theta.len() {
        let x = theta[i];
        probe[i] = x + step;
        let (u_plus, _) = objective.eval_full(&probe)?;
        probe[i] = x - step;
        let (u_minus, _) = objective.eval_full(&probe)?;
        probe[i] = x;
        let numeric = (u_plus - u_minus) / (2.0 * step);
        let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(1.0);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{NoiseSource, RngStream};
    use crate::objectives::{DoubleWell, Quadratic};

    #[test]
    fn quadratic_is_exact_to_roundoff() {
        let obj = Quadratic::new(4);
        let theta = ParamVector::from_vec(vec![0.3, -1.7, 2.0, 0.0]).unwrap();
        let err = grad_check(&obj, &theta, 1e-6).unwrap();
        assert!(err < 1e-9, "error {err}");
    }

    #[test]
    fn double_well_polynomial_error_budget() {
        let obj = DoubleWell;
        let theta = ParamVector::from_vec(vec![0.7]).unwrap();
        let err = grad_check(&obj, &theta, 1e-6).unwrap();
        assert!(err < 1e-7, "error {err}");
    }

    #[test]
    fn tiny_mlp_under_1e5() {
        use crate::objectives::{Dataset, MlpClassifier, Split};
        let mut rng = RngStream::new(11);
        let features: Vec<f64> = (0..5 * 4).map(|_| rng.standard_normal()).collect();
        let labels = vec![0usize, 1, 0, 1, 1];
        let data = Dataset::new(features, 4, labels, 2, Split::Train).unwrap();
        let mlp = MlpClassifier::new(vec![4, 3, 2], data, 0.0).unwrap();
        for trial in 0..5 {
            let mut init_rng = RngStream::new(100 + trial);
            let theta = mlp.init_params(&mut init_rng);
            let err = grad_check(&mlp, &theta, 1e-6).unwrap();
            assert!(err < 1e-5, "trial {trial}: error {err}");
        }
    }
}
