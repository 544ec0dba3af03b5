//! Dense 64-bit parameter vectors with element-wise arithmetic.

use super::CoreError;

/// A dense vector of `f64` model parameters (or any per-coordinate auxiliary
/// quantity of the same length: momentum, thermostat, second moments, ...).
///
/// Element-wise binary operations panic on length mismatch — mixing vectors of
/// different dimension is a programming error, not a runtime condition.
/// Finiteness, by contrast, is a runtime condition (divergence) and is checked
/// via [`ParamVector::ensure_finite`] at the public operation boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    /// Builds a vector from raw values, rejecting NaN/Inf entries.
    pub fn from_vec(values: Vec<f64>) -> Result<Self, CoreError> {
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(CoreError::NonFinite {
                context: "ParamVector::from_vec".to_string(),
                index,
            });
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![1.0; len])
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    fn check_len(&self, other: &Self) {
        assert_eq!(
            self.0.len(),
            other.0.len(),
            "ParamVector length mismatch: {} vs {}",
            self.0.len(),
            other.0.len()
        );
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.check_len(other);
        Self(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// Element-wise (Hadamard) product.
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// Element-wise division; a zero anywhere in the divisor is reported
    /// rather than silently propagating infinities.
    pub fn checked_div(&self, other: &Self) -> Result<Self, CoreError> {
        self.check_len(other);
        if let Some(index) = other.0.iter().position(|&x| x == 0.0) {
            return Err(CoreError::DivisionByZero { index });
        }
        Ok(self.zip_map(other, |a, b| a / b))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| s * x)
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        self.map(|x| x + s)
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.check_len(other);
        for (a, &b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
    }

    /// `self += s * other`, in place.
    pub fn add_scaled_assign(&mut self, s: f64, other: &Self) {
        self.check_len(other);
        for (a, &b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += s * b;
        }
    }

    pub fn mul_assign(&mut self, other: &Self) {
        self.check_len(other);
        for (a, &b) in self.0.iter_mut().zip(other.0.iter()) {
            *a *= b;
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.check_len(other);
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Reports the first non-finite entry, naming the quantity being checked.
    pub fn ensure_finite(&self, context: &str) -> Result<(), CoreError> {
        match self.0.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(index) => Err(CoreError::NonFinite {
                context: context.to_string(),
                index,
            }),
        }
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for ParamVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(v: ParamVector) -> Vec<f64> {
        v.0
    }
}
