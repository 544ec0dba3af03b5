//! Reference optimizers and samplers: SGD, SGD with momentum (two variants),
//! SGLD, mSGNHT, RMSprop, and Adam. Each stepper is a pure in-place update
//! sharing the objective and randomness contracts of the rest of the crate.

use thiserror::Error;

use crate::core::{CoreError, NoiseSource, ParamVector, StepSchedule};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("divergence at step {step}: non-finite parameters")]
    Divergence { step: u64 },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// θ' = θ − η·f̃.
pub fn sgd_step(theta: &mut ParamVector, f: &ParamVector, eta: f64) {
    theta.add_scaled_assign(-eta, f);
}

/// Momentum form with the rate applied to the position update:
/// u' = (1 − α)·u − f̃, then θ' = θ + η·u'.
pub fn sgdm_step(
    theta: &mut ParamVector,
    u: &mut ParamVector,
    f: &ParamVector,
    eta: f64,
    alpha: f64,
) {
    for (ui, &fi) in u.as_mut_slice().iter_mut().zip(f.iter()) {
        *ui = (1.0 - alpha) * *ui - fi;
    }
    theta.add_scaled_assign(eta, u);
}

/// Rescaled momentum variant: u' = (1 − α)·u − η·f̃, then θ' = θ + u'.
/// This is the form that coincides with Santa's refinement stage when the
/// preconditioner is pinned to one.
pub fn sgdm_step_rescaled(
    theta: &mut ParamVector,
    u: &mut ParamVector,
    f: &ParamVector,
    eta: f64,
    alpha: f64,
) {
    for (ui, &fi) in u.as_mut_slice().iter_mut().zip(f.iter()) {
        *ui = (1.0 - alpha) * *ui - eta * fi;
    }
    theta.add_assign(u);
}

/// θ' = θ − η·f̃ + √(2η)·ζ.
pub fn sgld_step(theta: &mut ParamVector, f: &ParamVector, eta: f64, noise: &mut dyn NoiseSource) {
    let zeta = noise.gaussian_vector(theta.len());
    let amp = (2.0 * eta).sqrt();
    for ((ti, &fi), &zi) in theta
        .as_mut_slice()
        .iter_mut()
        .zip(f.iter())
        .zip(zeta.iter())
    {
        *ti += -eta * fi + amp * zi;
    }
}

/// Multivariate stochastic-gradient Nosé-Hoover thermostat, updates in
/// order u, θ, α:
///   u' = (1 − η·α) ⊙ u − η·f̃ + √(2η/β)·ζ
///   θ' = θ + η·u'
///   α' = α + η·(u' ⊙ u' − 1/β)
pub fn msgnht_step(
    theta: &mut ParamVector,
    u: &mut ParamVector,
    alpha: &mut ParamVector,
    f: &ParamVector,
    eta: f64,
    beta: f64,
    noise: &mut dyn NoiseSource,
) {
    let zeta = noise.gaussian_vector(theta.len());
    let amp = (2.0 * eta / beta).sqrt();
    for (((ui, &ai), &fi), &zi) in u
        .as_mut_slice()
        .iter_mut()
        .zip(alpha.iter())
        .zip(f.iter())
        .zip(zeta.iter())
    {
        *ui = (1.0 - eta * ai) * *ui - eta * fi + amp * zi;
    }
    theta.add_scaled_assign(eta, u);
    let temp = 1.0 / beta;
    for (ai, &ui) in alpha.as_mut_slice().iter_mut().zip(u.iter()) {
        *ai += eta * (ui * ui - temp);
    }
}

/// v' = σ·v + (1−σ)·f̃ ⊙ f̃, then θ' = θ − η·f̃ ⊘ (√v' + λ).
pub fn rmsprop_step(
    theta: &mut ParamVector,
    v: &mut ParamVector,
    f: &ParamVector,
    eta: f64,
    sigma: f64,
    lambda: f64,
) {
    for (vi, &fi) in v.as_mut_slice().iter_mut().zip(f.iter()) {
        *vi = sigma * *vi + (1.0 - sigma) * fi * fi;
    }
    for ((ti, &fi), &vi) in theta.as_mut_slice().iter_mut().zip(f.iter()).zip(v.iter()) {
        *ti -= eta * fi / (vi.sqrt() + lambda);
    }
}

/// Adam with the nested preconditioner denominator √(λ + √v'):
///   m' = (1 − b1)·m + b1·f̃
///   v' = b2·v + (1 − b2)·f̃ ⊙ f̃
///   θ' = θ − η·m̂ ⊘ √(λ + √v̂)
/// Bias correction (m̂ = m'/(1−(1−b1)^t), v̂ = v'/(1−b2^t)) is off by
/// default; `bias_correction` restores the published form.
#[allow(clippy::too_many_arguments)]
pub fn adam_step(
    theta: &mut ParamVector,
    m: &mut ParamVector,
    v: &mut ParamVector,
    f: &ParamVector,
    eta: f64,
    b1: f64,
    b2: f64,
    lambda: f64,
    t: u64,
    bias_correction: bool,
) {
    for (mi, &fi) in m.as_mut_slice().iter_mut().zip(f.iter()) {
        *mi = (1.0 - b1) * *mi + b1 * fi;
    }
    for (vi, &fi) in v.as_mut_slice().iter_mut().zip(f.iter()) {
        *vi = b2 * *vi + (1.0 - b2) * fi * fi;
    }
    let (m_corr, v_corr) = if bias_correction {
        let tm = 1.0 - (1.0 - b1).powi(t as i32);
        let tv = 1.0 - b2.powi(t as i32);
        (tm, tv)
    } else {
        (1.0, 1.0)
    };
    for ((ti, &mi), &vi) in theta.as_mut_slice().iter_mut().zip(m.iter()).zip(v.iter()) {
        let mh = mi / m_corr;
        let vh = vi / v_corr;
        *ti -= eta * mh / (lambda + vh.sqrt()).sqrt();
    }
}

/// Which baseline a [`BaselineRun`] steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Sgd,
    Sgdm,
    SgdmRescaled,
    Sgld,
    Msgnht,
    Rmsprop,
    Adam,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Sgd => "sgd",
            BaselineKind::Sgdm => "sgdm",
            BaselineKind::SgdmRescaled => "sgdm-rescaled",
            BaselineKind::Sgld => "sgld",
            BaselineKind::Msgnht => "msgnht",
            BaselineKind::Rmsprop => "rmsprop",
            BaselineKind::Adam => "adam",
        }
    }
}

/// Baseline configuration. Parameter ranges per kind: `momentum` ∈ [0, 1]
/// (SGDM friction / mSGNHT thermostat start), `sigma` ∈ [0, 1) with
/// `lambda` > 0 (RMSprop/Adam), `b1` ∈ (0, 1] and `b2` ∈ (0, 1] (Adam),
/// `beta` > 0 (SGLD/mSGNHT temperature).
#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub eta: StepSchedule,
    pub momentum: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub b1: f64,
    pub b2: f64,
    pub beta: f64,
    pub bias_correction: bool,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, eta: StepSchedule) -> Self {
        Self {
            kind,
            eta,
            momentum: match kind {
                BaselineKind::Msgnht => 1.0,
                _ => 0.1,
            },
            sigma: 0.99,
            lambda: 1e-8,
            b1: 0.1,
            b2: 0.999,
            beta: 1.0,
            bias_correction: false,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let check = |name: &'static str, value: f64, ok: bool, constraint: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(CoreError::InvalidParameter {
                    name,
                    value,
                    constraint,
                })
            }
        };
        match self.kind {
            BaselineKind::Sgdm | BaselineKind::SgdmRescaled => check(
                "momentum",
                self.momentum,
                (0.0..=1.0).contains(&self.momentum),
                "must lie in [0, 1]",
            ),
            BaselineKind::Rmsprop => {
                check(
                    "sigma",
                    self.sigma,
                    (0.0..1.0).contains(&self.sigma),
                    "must lie in [0, 1)",
                )?;
                check("lambda", self.lambda, self.lambda > 0.0, "must be positive")
            }
            BaselineKind::Adam => {
                check(
                    "b1",
                    self.b1,
                    self.b1 > 0.0 && self.b1 <= 1.0,
                    "must lie in (0, 1]",
                )?;
                check(
                    "b2",
                    self.b2,
                    self.b2 > 0.0 && self.b2 <= 1.0,
                    "must lie in (0, 1]",
                )?;
                check("lambda", self.lambda, self.lambda > 0.0, "must be positive")
            }
            BaselineKind::Sgld | BaselineKind::Msgnht => {
                check("beta", self.beta, self.beta > 0.0, "must be positive")
            }
            BaselineKind::Sgd => Ok(()),
        }
    }
}

/// Owns the auxiliary state of one baseline trajectory.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub cfg: BaselineConfig,
    pub theta: ParamVector,
    pub u: ParamVector,
    pub v: ParamVector,
    pub m: ParamVector,
    pub alpha: ParamVector,
    pub t: u64,
}

impl BaselineRun {
    pub fn new(cfg: BaselineConfig, theta0: ParamVector) -> Result<Self, BaselineError> {
        cfg.validate()?;
        let p = theta0.len();
        let alpha0 = match cfg.kind {
            BaselineKind::Msgnht => ParamVector::constant(p, cfg.momentum),
            _ => ParamVector::zeros(p),
        };
        Ok(Self {
            cfg,
            theta: theta0,
            u: ParamVector::zeros(p),
            v: ParamVector::zeros(p),
            m: ParamVector::zeros(p),
            alpha: alpha0,
            t: 0,
        })
    }

    /// Applies one update with the gradient `f` and advances the step count.
    pub fn step(
        &mut self,
        f: &ParamVector,
        noise: &mut dyn NoiseSource,
    ) -> Result<(), BaselineError> {
        let t = self.t + 1;
        let eta = self.cfg.eta.eta_at(t)?;
        match self.cfg.kind {
            BaselineKind::Sgd => sgd_step(&mut self.theta, f, eta),
            BaselineKind::Sgdm => {
                sgdm_step(&mut self.theta, &mut self.u, f, eta, self.cfg.momentum)
            }
            BaselineKind::SgdmRescaled => {
                sgdm_step_rescaled(&mut self.theta, &mut self.u, f, eta, self.cfg.momentum)
            }
            BaselineKind::Sgld => sgld_step(&mut self.theta, f, eta, noise),
            BaselineKind::Msgnht => msgnht_step(
                &mut self.theta,
                &mut self.u,
                &mut self.alpha,
                f,
                eta,
                self.cfg.beta,
                noise,
            ),
            BaselineKind::Rmsprop => rmsprop_step(
                &mut self.theta,
                &mut self.v,
                f,
                eta,
                self.cfg.sigma,
                self.cfg.lambda,
            ),
            BaselineKind::Adam => adam_step(
                &mut self.theta,
                &mut self.m,
                &mut self.v,
                f,
                eta,
                self.cfg.b1,
                self.cfg.b2,
                self.cfg.lambda,
                t,
                self.cfg.bias_correction,
            ),
        }
        self.t = t;
        if !self.theta.is_finite() || !self.u.is_finite() || !self.m.is_finite() {
            return Err(BaselineError::Divergence { step: t });
        }
        Ok(())
    }

    /// Norm of the momentum-like accumulator for trace rows (zero for
    /// memoryless kinds).
    pub fn momentum_norm(&self) -> f64 {
        match self.cfg.kind {
            BaselineKind::Sgdm | BaselineKind::SgdmRescaled | BaselineKind::Msgnht => self.u.norm(),
            BaselineKind::Adam => self.m.norm(),
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{RngStream, ZeroNoise};

    fn pv(values: &[f64]) -> ParamVector {
        ParamVector::from_vec(values.to_vec()).unwrap()
    }

    #[test]
    fn sgd_known_values() {
        let mut theta = pv(&[1.0]);
        sgd_step(&mut theta, &pv(&[2.0]), 0.5);
        assert_eq!(theta.as_slice(), &[0.0]);

        let mut theta = pv(&[0.0]);
        sgd_step(&mut theta, &pv(&[1.0]), 0.5);
        assert_eq!(theta.as_slice(), &[-0.5]);

        let mut theta = pv(&[0.7, -0.3]);
        sgd_step(&mut theta, &ParamVector::zeros(2), 0.5);
        assert_eq!(theta.as_slice(), &[0.7, -0.3]);
    }

    #[test]
    fn sgdm_known_values() {
        // α = 1 gives full friction: u' = −f̃.
        let mut theta = pv(&[0.0]);
        let mut u = pv(&[5.0]);
        sgdm_step(&mut theta, &mut u, &pv(&[2.0]), 0.1, 1.0);
        assert_eq!(u.as_slice(), &[-2.0]);

        let mut theta = pv(&[0.0]);
        let mut u = pv(&[1.0]);
        sgdm_step(&mut theta, &mut u, &pv(&[0.0]), 1.0, 0.1);
        assert!((u[0] - 0.9).abs() < 1e-15);
        assert!((theta[0] - 0.9).abs() < 1e-15);

        // fixed point at f̃ = 0, u = 0
        let mut theta = pv(&[0.4]);
        let mut u = pv(&[0.0]);
        sgdm_step(&mut theta, &mut u, &pv(&[0.0]), 1.0, 0.1);
        assert_eq!(theta.as_slice(), &[0.4]);
        assert_eq!(u.as_slice(), &[0.0]);
    }

    #[test]
    fn sgld_with_zero_noise_is_sgd() {
        let f = pv(&[3.0, -1.0]);
        let mut a = pv(&[1.0, 2.0]);
        let mut b = a.clone();
        sgld_step(&mut a, &f, 0.25, &mut ZeroNoise);
        sgd_step(&mut b, &f, 0.25);
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn sgld_noise_variance_is_two_eta() {
        let eta = 0.05;
        let mut rng = RngStream::new(8);
        let trials = 100_000;
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let mut theta = pv(&[0.0]);
            sgld_step(&mut theta, &pv(&[0.0]), eta, &mut rng);
            sum_sq += theta[0] * theta[0];
        }
        let var = sum_sq / trials as f64;
        let expected = 2.0 * eta;
        assert!((var - expected).abs() / expected < 0.05, "var {var}");
    }

    #[test]
    fn msgnht_deterministic_limit_and_thermostat_fixed_point() {
        // 1/β = 0 is not representable (β must be positive); take β huge so
        // the noise amplitude √(2η/β) is negligible, and ζ = 0 anyway.
        let mut theta = pv(&[0.0]);
        let mut u = pv(&[1.0]);
        let mut alpha = pv(&[0.5]);
        let eta = 0.1;
        msgnht_step(
            &mut theta,
            &mut u,
            &mut alpha,
            &pv(&[2.0]),
            eta,
            1e300,
            &mut ZeroNoise,
        );
        // u' = (1 − 0.05)·1 − 0.2, θ' = 0.1·u'
        assert!((u[0] - 0.75).abs() < 1e-12);
        assert!((theta[0] - 0.075).abs() < 1e-12);

        // thermostat fixed point: u ⊙ u = 1/β keeps α unchanged
        // (α = 0, f̃ = 0, ζ = 0 so u itself is untouched too)
        let beta = 4.0;
        let u_eq = 0.5;
        let mut theta = pv(&[0.0]);
        let mut u = pv(&[u_eq]);
        let mut alpha = pv(&[0.0]);
        msgnht_step(
            &mut theta,
            &mut u,
            &mut alpha,
            &pv(&[0.0]),
            0.1,
            beta,
            &mut ZeroNoise,
        );
        assert!((u[0] - u_eq).abs() < 1e-15, "u unchanged when α = 0, f̃ = 0");
        assert!(alpha[0].abs() < 1e-15, "α fixed when u² = 1/β");
    }

    #[test]
    fn rmsprop_known_values() {
        // σ = 0: v' = f̃²
        let mut theta = pv(&[0.0]);
        let mut v = pv(&[0.0]);
        rmsprop_step(&mut theta, &mut v, &pv(&[3.0]), 0.01, 0.0, 1e-8);
        assert!((v[0] - 9.0).abs() < 1e-15);

        // converged v = c²: step ≈ −η·sign(c)
        let c = -2.5f64;
        let mut theta = pv(&[1.0]);
        let mut v = pv(&[c * c]);
        rmsprop_step(&mut theta, &mut v, &pv(&[c]), 0.01, 0.9, 1e-8);
        assert!((theta[0] - (1.0 + 0.01)).abs() < 1e-6);

        // fixed point
        let mut theta = pv(&[0.3]);
        let mut v = pv(&[0.0]);
        rmsprop_step(&mut theta, &mut v, &pv(&[0.0]), 0.01, 0.9, 1e-8);
        assert_eq!(theta.as_slice(), &[0.3]);
    }

    #[test]
    fn adam_known_values() {
        // b1 = 1: no smoothing, m' = f̃
        let mut theta = pv(&[0.0]);
        let mut m = pv(&[9.0]);
        let mut v = pv(&[0.0]);
        adam_step(
            &mut theta,
            &mut m,
            &mut v,
            &pv(&[2.0]),
            0.1,
            1.0,
            0.999,
            1e-8,
            1,
            false,
        );
        assert!((m[0] - 2.0).abs() < 1e-15);

        // fixed point at f̃ = 0, m = 0
        let mut theta = pv(&[0.5]);
        let mut m = pv(&[0.0]);
        let mut v = pv(&[0.0]);
        adam_step(
            &mut theta,
            &mut m,
            &mut v,
            &pv(&[0.0]),
            0.1,
            0.1,
            0.999,
            1e-8,
            1,
            false,
        );
        assert_eq!(theta.as_slice(), &[0.5]);
    }

    #[test]
    fn accumulators_stay_nonnegative() {
        let mut rng = RngStream::new(3);
        let mut run = BaselineRun::new(
            BaselineConfig::new(BaselineKind::Adam, StepSchedule::constant(1e-3).unwrap()),
            pv(&[0.1, -0.2]),
        )
        .unwrap();
        for _ in 0..100 {
            let f = crate::core::NoiseSource::gaussian_vector(&mut rng, 2).scale(3.0);
            run.step(&f, &mut ZeroNoise).unwrap();
            assert!(run.v.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let eta = StepSchedule::constant(0.1).unwrap();
        let mut cfg = BaselineConfig::new(BaselineKind::Rmsprop, eta.clone());
        cfg.sigma = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = BaselineConfig::new(BaselineKind::Adam, eta.clone());
        cfg.b1 = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = BaselineConfig::new(BaselineKind::Msgnht, eta);
        cfg.beta = -1.0;
        assert!(cfg.validate().is_err());
    }
}
