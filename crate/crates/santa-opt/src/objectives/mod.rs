//! Potential-energy functions with analytic (stochastic) gradients.
//!
//! An [`Objective`] evaluates the potential U(θ) — for data-backed models the
//! minibatch approximation Ũ(θ) = -log p(θ) - (N/m)·Σ_j log p(x_ij | θ) — and
//! its gradient. Steppers consume objectives through the [`GradientSource`]
//! trait, which owns the per-step minibatch selection.

mod double_well;
mod idx;
mod minibatch;
mod mlp;
mod quadratic;

pub use double_well::{double_well_eval, DoubleWell};
pub use idx::{load_idx, write_idx, IdxError, IMAGE_MAGIC, LABEL_MAGIC};
pub use minibatch::{minibatch_sampler, BatchMode, Minibatches};
pub use mlp::MlpClassifier;
pub use quadratic::{quadratic_eval, Quadratic};

use crate::core::{CoreError, NoiseSource, ParamVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("dimension mismatch: objective expects {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("label {label} out of range [0, {classes})")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("minibatch index {index} out of range [0, {n})")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("batch size {m} exceeds dataset size {n}")]
    BatchTooLarge { m: usize, n: usize },
    #[error("feature/label count mismatch: {features} features rows vs {labels} labels")]
    CountMismatch { features: usize, labels: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Potential energy with an analytic gradient, evaluated on a minibatch of
/// data indices. Objectives are immutable after construction and evaluation
/// is pure given (θ, batch).
pub trait Objective {
    /// Parameter count p.
    fn dim(&self) -> usize;

    /// Dataset size N (1 for closed-form test functions).
    fn n_data(&self) -> usize {
        1
    }

    /// Ũ(θ) and ∇Ũ(θ) on the given minibatch. Closed-form objectives ignore
    /// the batch.
    fn eval_batch(
        &self,
        theta: &ParamVector,
        batch: &[usize],
    ) -> Result<(f64, ParamVector), ObjectiveError>;

    /// U(θ) and ∇U(θ) on the full dataset.
    fn eval_full(&self, theta: &ParamVector) -> Result<(f64, ParamVector), ObjectiveError> {
        let all: Vec<usize> = (0..self.n_data()).collect();
        self.eval_batch(theta, &all)
    }
}

/// Per-step supplier of the stochastic gradient f̃_t = ∇Ũ_t(θ_{t-1}).
///
/// The noise source is the run's single random stream; implementations that
/// subsample data must draw their indices from it so that a (seed, config)
/// pair fully determines the trajectory.
pub trait GradientSource {
    fn dim(&self) -> usize;

    fn eval(
        &mut self,
        step: u64,
        theta: &ParamVector,
        noise: &mut dyn NoiseSource,
    ) -> Result<(f64, ParamVector), ObjectiveError>;
}

/// Evaluates an objective on its full dataset every step.
pub struct FullBatch<'a, O: Objective + ?Sized>(pub &'a O);

impl<O: Objective + ?Sized> GradientSource for FullBatch<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(
        &mut self,
        _step: u64,
        theta: &ParamVector,
        _noise: &mut dyn NoiseSource,
    ) -> Result<(f64, ParamVector), ObjectiveError> {
        self.0.eval_full(theta)
    }
}

/// Returns a fixed gradient regardless of θ (U reported as 0). Used by limit
/// and equivalence checks that need full control over the gradient stream.
pub struct FixedGradient(pub ParamVector);

impl GradientSource for FixedGradient {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn eval(
        &mut self,
        _step: u64,
        _theta: &ParamVector,
        _noise: &mut dyn NoiseSource,
    ) -> Result<(f64, ParamVector), ObjectiveError> {
        Ok((0.0, self.0.clone()))
    }
}

/// Applies a scalar factor to another source's gradient (and Ũ).
pub struct ScaledGradient<G> {
    pub inner: G,
    pub factor: f64,
}

impl<G: GradientSource> GradientSource for ScaledGradient<G> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(
        &mut self,
        step: u64,
        theta: &ParamVector,
        noise: &mut dyn NoiseSource,
    ) -> Result<(f64, ParamVector), ObjectiveError> {
        let (u, grad) = self.inner.eval(step, theta, noise)?;
        Ok((self.factor * u, grad.scale(self.factor)))
    }
}

/// A labelled dataset: n rows of d features plus integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    n: usize,
    d: usize,
    classes: usize,
    pub split: Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        d: usize,
        labels: Vec<usize>,
        classes: usize,
        split: Split,
    ) -> Result<Self, ObjectiveError> {
        let n = labels.len();
        if features.len() != n * d {
            return Err(ObjectiveError::CountMismatch {
                features: features.len().checked_div(d).unwrap_or(0),
                labels: n,
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(ObjectiveError::LabelOutOfRange { label, classes });
        }
        Ok(Self {
            features,
            labels,
            n,
            d,
            classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.d
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// A new dataset containing the given rows, in order.
    pub fn subset(&self, rows: &[usize], split: Split) -> Result<Self, ObjectiveError> {
        let mut features = Vec::with_capacity(rows.len() * self.d);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.n {
                return Err(ObjectiveError::IndexOutOfRange {
                    index: r,
                    n: self.n,
                });
            }
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        Dataset::new(features, self.d, labels, self.classes, split)
    }
}
