//! Shared numeric types: dense parameter vectors, schedules, and the
//! deterministic randomness contract every optimizer in this crate consumes.

mod rng;
mod schedule;
mod vector;

pub use rng::{NoiseSource, RngStream, ZeroNoise};
pub use schedule::{AnnealSchedule, StepSchedule};
pub use vector::ParamVector;

use thiserror::Error;

/// Errors raised by the shared numeric types.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("element-wise division by a vector containing zero (index {index})")]
    DivisionByZero { index: usize },
    #[error("non-finite value in {context} (index {index})")]
    NonFinite { context: String, index: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}
