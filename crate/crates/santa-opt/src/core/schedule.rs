//! Inverse-temperature and learning-rate schedules.
//!
//! The stepsize h and the learning rate η are related by η = h², so a
//! schedule specified on h (like h_t = t^{-0.3}/10) is squared when queried
//! for η. [`StepSchedule::power_decay`] takes an `h_schedule` flag that
//! selects between the two conventions.

use super::CoreError;

/// Inverse-temperature sequence β_t.
#[derive(Debug, Clone, PartialEq)]
pub enum AnnealSchedule {
    /// β_t = A·t^γ, strictly increasing for A > 0, γ > 0.
    PowerLaw { a: f64, gamma: f64 },
    /// β_t = β for all t; used for fixed-temperature sampler tests.
    Constant(f64),
}

impl AnnealSchedule {
    pub fn power_law(a: f64, gamma: f64) -> Result<Self, CoreError> {
        if !(a > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "A",
                value: a,
                constraint: "must be positive",
            });
        }
        if !(gamma > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "gamma",
                value: gamma,
                constraint: "must be positive for an increasing schedule",
            });
        }
        Ok(Self::PowerLaw { a, gamma })
    }

    pub fn constant(beta: f64) -> Result<Self, CoreError> {
        if !(beta > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "beta",
                value: beta,
                constraint: "must be positive",
            });
        }
        Ok(Self::Constant(beta))
    }

    /// β_t for step index t ≥ 1.
    pub fn beta_at(&self, t: u64) -> Result<f64, CoreError> {
        if t == 0 {
            return Err(CoreError::Domain(
                "beta_at: step index starts at 1".to_string(),
            ));
        }
        Ok(match *self {
            Self::PowerLaw { a, gamma } => a * (t as f64).powf(gamma),
            Self::Constant(beta) => beta,
        })
    }
}

/// Learning-rate sequence η_t (equivalently a stepsize sequence h_t = √η_t).
#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// c·t^{-k}; with `h_schedule` the decay describes h_t and η_t = (c·t^{-k})².
    PowerDecay {
        c: f64,
        k: f64,
        h_schedule: bool,
    },
}

impl StepSchedule {
    pub fn constant(eta: f64) -> Result<Self, CoreError> {
        if !(eta > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "eta",
                value: eta,
                constraint: "must be positive",
            });
        }
        Ok(Self::Constant(eta))
    }

    pub fn power_decay(c: f64, k: f64, h_schedule: bool) -> Result<Self, CoreError> {
        if !(c > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "c",
                value: c,
                constraint: "must be positive",
            });
        }
        Ok(Self::PowerDecay { c, k, h_schedule })
    }

    /// η_t for step index t ≥ 1.
    pub fn eta_at(&self, t: u64) -> Result<f64, CoreError> {
        if t == 0 {
            return Err(CoreError::Domain(
                "eta_at: step index starts at 1".to_string(),
            ));
        }
        Ok(match *self {
            Self::Constant(eta) => eta,
            Self::PowerDecay { c, k, h_schedule } => {
                let decayed = c * (t as f64).powf(-k);
                if h_schedule {
                    decayed * decayed
                } else {
                    decayed
                }
            }
        })
    }

    /// h_t = √η_t.
    pub fn h_at(&self, t: u64) -> Result<f64, CoreError> {
        Ok(self.eta_at(t)?.sqrt())
    }
}
