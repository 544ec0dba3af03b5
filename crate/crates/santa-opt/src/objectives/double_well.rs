//! The scalar double-well potential
//! U(θ) = (θ+4)(θ+1)(θ−1)(θ−3)/14 + 0.5,
//! which expands to (θ⁴ + θ³ − 13θ² − θ + 12)/14 + 0.5. Its two wells sit
//! near θ ≈ −2.94 (global) and θ ≈ 2.22 (local).

use super::{Objective, ObjectiveError};
use crate::core::ParamVector;

/// U and dU/dθ at a scalar point.
pub fn double_well_eval(theta: f64) -> (f64, f64) {
    let u = (theta + 4.0) * (theta + 1.0) * (theta - 1.0) * (theta - 3.0) / 14.0 + 0.5;
    let du = (4.0 * theta.powi(3) + 3.0 * theta * theta - 26.0 * theta - 1.0) / 14.0;
    (u, du)
}

/// One-dimensional double-well objective.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleWell;

impl Objective for DoubleWell {
    fn dim(&self) -> usize {
        1
    }

    fn eval_batch(
        &self,
        theta: &ParamVector,
        _batch: &[usize],
    ) -> Result<(f64, ParamVector), ObjectiveError> {
        if theta.len() != 1 {
            return Err(ObjectiveError::DimMismatch {
                expected: 1,
                got: theta.len(),
            });
        }
        let (u, du) = double_well_eval(theta[0]);
        Ok((u, ParamVector::from_vec(vec![du])?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // (1)(−2)(−4)(−6)/14 + 0.5 = −48/14 + 0.5
        let (u, _) = double_well_eval(-3.0);
        assert!((u - (-48.0 / 14.0 + 0.5)).abs() < 1e-12);
        // (6)(3)(1)(−1)/14 + 0.5 = −18/14 + 0.5
        let (u, _) = double_well_eval(2.0);
        assert!((u - (-18.0 / 14.0 + 0.5)).abs() < 1e-12);
        // (θ−1) factor zero
        let (u, _) = double_well_eval(1.0);
        assert!((u - 0.5).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_expanded_quartic() {
        for &theta in &[-3.5, -1.0, 0.0, 0.7, 2.0, 4.0] {
            let (_, du) = double_well_eval(theta);
            let expected = (4.0 * theta.powi(3) + 3.0 * theta * theta - 26.0 * theta - 1.0) / 14.0;
            assert_eq!(du, expected);
        }
        // dU is not exactly zero at the rounded mode locations −3 and 2
        assert!(double_well_eval(-3.0).1.abs() > 1e-3);
    }
}
