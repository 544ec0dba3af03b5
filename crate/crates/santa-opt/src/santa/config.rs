//! Santa optimizer configuration.

use crate::core::{AnnealSchedule, CoreError, StepSchedule};

/// Which discretization drives the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// First-order Euler update.
    Euler,
    /// Symmetric splitting (A-B-O-B-A) built from closed-form sub-SDE
    /// solutions; weak order 2.
    Sss,
}

/// Which multiplier scales the injected Gaussian noise. The previous-step
/// preconditioner is the textbook choice; a fixed constant is a documented
/// simplification that does not change the algorithm's behaviour materially.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseG {
    UsePrevG,
    FixedConstant(f64),
}

/// Power of η in the injected-noise amplitude √(2·g·η^e/β).
///
/// `Eta` (e = 1) matches the primary update equations; `EtaThreeHalves`
/// (e = 3/2) is the Euler–Maruyama-consistent scaling in the u = √η·p
/// parameterization (noise variance proportional to the stepsize h = √η),
/// which is the right choice when the sampler's stationary distribution
/// itself is under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseExponent {
    Eta,
    EtaThreeHalves,
}

impl NoiseExponent {
    pub(crate) fn apply(self, eta: f64) -> f64 {
        match self {
            NoiseExponent::Eta => eta,
            NoiseExponent::EtaThreeHalves => eta * eta.sqrt(),
        }
    }
}

/// Full parameterization of a Santa run.
#[derive(Debug, Clone)]
pub struct SantaConfig {
    /// Second-moment smoothing σ ∈ [0, 1).
    pub sigma: f64,
    /// Preconditioner stabilizer λ > 0.
    pub lambda: f64,
    /// Dataset size N entering the 1/N² factor of the v update (1 for pure
    /// test functions).
    pub n_data: usize,
    /// Step index at which refinement begins (steps t < burnin explore).
    pub burnin: u64,
    /// Thermostat initialization constant: α₀ = √η₁·C.
    pub c0: f64,
    pub anneal: AnnealSchedule,
    pub step: StepSchedule,
    pub scheme: Scheme,
    /// Include the (1 − g_{t-1} ⊘ g_t) ⊘ u_{t-1} metric-gradient term in
    /// exploration. Off by default: it is an O(h) approximation term whose
    /// omission does not change performance.
    pub include_metric_grad_term: bool,
    pub noise_g: NoiseG,
    /// Guard ε_u for the ⊘ u_{t-1} division in the metric term.
    pub u_guard: f64,
    pub noise_exponent: NoiseExponent,
    /// Pin the preconditioner to a constant (g ≡ c) instead of the adaptive
    /// RMSprop recipe. Used by sampler-correctness and equivalence tests that
    /// need the preconditioner path out of the statistic.
    pub g_pin: Option<f64>,
}

impl SantaConfig {
    /// Configuration with crate defaults: σ = 0.999, λ = 1e-8, C = 5, N = 1,
    /// metric term off, noise scaled by g_{t-1} with exponent 1, ε_u = 1e-8,
    /// adaptive preconditioner.
    pub fn new(
        anneal: AnnealSchedule,
        step: StepSchedule,
        burnin: u64,
        scheme: Scheme,
    ) -> Result<Self, CoreError> {
        let cfg = Self {
            sigma: 0.999,
            lambda: 1e-8,
            n_data: 1,
            burnin,
            c0: 5.0,
            anneal,
            step,
            scheme,
            include_metric_grad_term: false,
            noise_g: NoiseG::UsePrevG,
            u_guard: 1e-8,
            noise_exponent: NoiseExponent::Eta,
            g_pin: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_n_data(mut self, n: usize) -> Self {
        self.n_data = n;
        self
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }

    pub fn with_metric_grad_term(mut self, on: bool) -> Self {
        self.include_metric_grad_term = on;
        self
    }

    pub fn with_noise_g(mut self, noise_g: NoiseG) -> Self {
        self.noise_g = noise_g;
        self
    }

    pub fn with_noise_exponent(mut self, e: NoiseExponent) -> Self {
        self.noise_exponent = e;
        self
    }

    pub fn with_g_pin(mut self, pin: Option<f64>) -> Self {
        self.g_pin = pin;
        self
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(CoreError::InvalidParameter {
                name: "sigma",
                value: self.sigma,
                constraint: "must lie in [0, 1)",
            });
        }
        if !(self.lambda > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                constraint: "must be positive",
            });
        }
        if self.n_data == 0 {
            return Err(CoreError::InvalidParameter {
                name: "n_data",
                value: 0.0,
                constraint: "must be at least 1",
            });
        }
        if self.burnin == 0 {
            return Err(CoreError::InvalidParameter {
                name: "burnin",
                value: 0.0,
                constraint: "must be at least 1",
            });
        }
        if !(self.u_guard > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "u_guard",
                value: self.u_guard,
                constraint: "must be positive",
            });
        }
        if !(self.c0 > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "c0",
                value: self.c0,
                constraint: "must be positive",
            });
        }
        if let NoiseG::FixedConstant(c) = self.noise_g {
            if !(c >= 0.0) {
                return Err(CoreError::InvalidParameter {
                    name: "noise_g",
                    value: c,
                    constraint: "fixed noise constant must be non-negative",
                });
            }
        }
        if let Some(pin) = self.g_pin {
            if !(pin > 0.0) {
                return Err(CoreError::InvalidParameter {
                    name: "g_pin",
                    value: pin,
                    constraint: "pinned preconditioner must be positive",
                });
            }
        }
        Ok(())
    }
}
