//! Isotropic quadratic potential U(θ) = ½·θᵀθ, the stationarity-test target:
//! at inverse temperature β = 1 its Gibbs distribution is standard normal in
//! every coordinate.

use super::{Objective, ObjectiveError};
use crate::core::ParamVector;

pub fn quadratic_eval(theta: &ParamVector) -> (f64, ParamVector) {
    (0.5 * theta.dot(theta), theta.clone())
}

#[derive(Debug, Clone, Copy)]
pub struct Quadratic {
    dim: usize,
}

impl Quadratic {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_batch(
        &self,
        theta: &ParamVector,
        _batch: &[usize],
    ) -> Result<(f64, ParamVector), ObjectiveError> {
        if theta.len() != self.dim {
            return Err(ObjectiveError::DimMismatch {
                expected: self.dim,
                got: theta.len(),
            });
        }
        let (u, grad) = quadratic_eval(theta);
        Ok((u, grad))
    }
}
