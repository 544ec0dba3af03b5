//! Stationary-moment tests against the standard-normal target.
//!
//! At inverse temperature β = 1 on U(θ) = ½·θᵀθ every correct sampler has
//! θ ~ N(0, I), so the empirical per-coordinate mean must sit within
//! [`MEAN_TOLERANCE`] of 0 and the variance within [`VARIANCE_TOLERANCE`]
//! of 1. The Santa samplers run pinned to exploration with g ≡ 1 and the
//! stepsize-consistent η^{3/2} noise scaling, keeping the preconditioner
//! path out of the statistic.

use crate::baselines::{BaselineConfig, BaselineKind, BaselineRun};
use crate::core::{AnnealSchedule, ParamVector, RngStream, StepSchedule};
use crate::objectives::{quadratic_eval, FullBatch, Quadratic};
use crate::santa::{
    init_state, NoiseExponent, SantaConfig, SantaState, Scheme, {self},
};

use super::DiagnosticsError;

pub const MEAN_TOLERANCE: f64 = 0.05;
pub const VARIANCE_TOLERANCE: f64 = 0.10;

/// Anything that produces a Markov chain of parameter vectors.
pub trait Sampler {
    fn dim(&self) -> usize;
    fn step(&mut self, rng: &mut RngStream) -> Result<&ParamVector, DiagnosticsError>;
}

/// Per-coordinate empirical mean and variance over the post-warmup samples.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub samples: usize,
    pub warmup: usize,
}

impl MomentReport {
    /// True iff every coordinate has |mean| ≤ mean_tol and
    /// |variance − 1| ≤ var_tol.
    pub fn passes(&self, mean_tol: f64, var_tol: f64) -> bool {
        self.mean.iter().all(|m| m.abs() <= mean_tol)
            && self.variance.iter().all(|v| (v - 1.0).abs() <= var_tol)
    }

    pub fn worst_mean(&self) -> f64 {
        self.mean.iter().fold(0.0f64, |acc, m| acc.max(m.abs()))
    }

    pub fn worst_variance_gap(&self) -> f64 {
        self.variance
            .iter()
            .fold(0.0f64, |acc, v| acc.max((v - 1.0).abs()))
    }
}

/// Streaming per-coordinate moment accumulator.
#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
}

impl MomentAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            sum: vec![0.0; dim],
            sum_sq: vec![0.0; dim],
            count: 0,
        }
    }

    pub fn push(&mut self, theta: &ParamVector) {
        for (i, &x) in theta.iter().enumerate() {
            self.sum[i] += x;
            self.sum_sq[i] += x * x;
        }
        self.count += 1;
    }

    pub fn report(&self, warmup: usize) -> MomentReport {
        let n = self.count.max(1) as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let variance: Vec<f64> = self
            .sum_sq
            .iter()
            .zip(mean.iter())
            .map(|(sq, m)| sq / n - m * m)
            .collect();
        MomentReport {
            mean,
            variance,
            samples: self.count,
            warmup,
        }
    }
}

/// Which sampler the stationarity test drives. All run at β = 1 on the
/// isotropic quadratic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerSpec {
    SantaEuler { eta: f64 },
    SantaSss { eta: f64 },
    Sgld { eta: f64 },
    Msgnht { eta: f64 },
}

struct SantaSampler {
    cfg: SantaConfig,
    state: SantaState,
    target: Quadratic,
}

impl Sampler for SantaSampler {
    fn dim(&self) -> usize {
        self.state.dim()
    }

    fn step(&mut self, rng: &mut RngStream) -> Result<&ParamVector, DiagnosticsError> {
        let mut source = FullBatch(&self.target);
        santa::step(&mut self.state, &mut source, &self.cfg, rng)
            .map_err(|e| DiagnosticsError::Divergence(e.to_string()))?;
        Ok(&self.state.theta)
    }
}

struct BaselineSampler {
    run: BaselineRun,
}

impl Sampler for BaselineSampler {
    fn dim(&self) -> usize {
        self.run.theta.len()
    }

    fn step(&mut self, rng: &mut RngStream) -> Result<&ParamVector, DiagnosticsError> {
        let (_, f) = quadratic_eval(&self.run.theta);
        self.run
            .step(&f, rng)
            .map_err(|e| DiagnosticsError::Divergence(e.to_string()))?;
        Ok(&self.run.theta)
    }
}

fn santa_sampler_config(eta: f64, scheme: Scheme) -> SantaConfig {
    SantaConfig::new(
        AnnealSchedule::constant(1.0).expect("beta = 1 is valid"),
        StepSchedule::constant(eta).expect("eta > 0"),
        u64::MAX, // pinned to exploration forever
        scheme,
    )
    .expect("sampler config is valid")
    .with_g_pin(Some(1.0))
    .with_noise_exponent(NoiseExponent::EtaThreeHalves)
}

/// Builds the sampler named by `spec` at the given dimension, drawing any
/// initialization randomness from `rng`.
pub fn sampler_for(
    spec: SamplerSpec,
    dim: usize,
    rng: &mut RngStream,
) -> Result<Box<dyn Sampler>, DiagnosticsError> {
    Ok(match spec {
        SamplerSpec::SantaEuler { eta } => {
            let cfg = santa_sampler_config(eta, Scheme::Euler);
            let state = init_state(dim, &cfg, rng)?;
            Box::new(SantaSampler {
                cfg,
                state,
                target: Quadratic::new(dim),
            })
        }
        SamplerSpec::SantaSss { eta } => {
            let cfg = santa_sampler_config(eta, Scheme::Sss);
            let state = init_state(dim, &cfg, rng)?;
            Box::new(SantaSampler {
                cfg,
                state,
                target: Quadratic::new(dim),
            })
        }
        SamplerSpec::Sgld { eta } => {
            let cfg = BaselineConfig::new(BaselineKind::Sgld, StepSchedule::constant(eta)?);
            Box::new(BaselineSampler {
                run: BaselineRun::new(cfg, ParamVector::zeros(dim))?,
            })
        }
        SamplerSpec::Msgnht { eta } => {
            let cfg = BaselineConfig::new(BaselineKind::Msgnht, StepSchedule::constant(eta)?);
            Box::new(BaselineSampler {
                run: BaselineRun::new(cfg, ParamVector::zeros(dim))?,
            })
        }
    })
}

/// Runs `warmup` discarded steps followed by `samples` recorded steps and
/// reports the empirical moments plus the pass/fail verdict at the standard
/// tolerances. Divergence during sampling is an error, distinct from a
/// failed tolerance check.
pub fn moment_test(
    sampler: &mut dyn Sampler,
    warmup: usize,
    samples: usize,
    rng: &mut RngStream,
) -> Result<(MomentReport, bool), DiagnosticsError> {
    assert!(samples > 0, "sample count must be positive");
    for _ in 0..warmup {
        sampler.step(rng)?;
    }
    let mut acc = MomentAccumulator::new(sampler.dim());
    for _ in 0..samples {
        let theta = sampler.step(rng)?;
        acc.push(theta);
    }
    let report = acc.report(warmup);
    let pass = report.passes(MEAN_TOLERANCE, VARIANCE_TOLERANCE);
    Ok((report, pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::NoiseSource;

    #[test]
    fn accumulator_matches_direct_computation() {
        let mut acc = MomentAccumulator::new(1);
        let values = [1.0, 2.0, 3.0, 4.0];
        for v in values {
            acc.push(&ParamVector::from_vec(vec![v]).unwrap());
        }
        let rep = acc.report(0);
        assert!((rep.mean[0] - 2.5).abs() < 1e-12);
        assert!((rep.variance[0] - 1.25).abs() < 1e-12);
        assert_eq!(rep.samples, 4);
    }

    #[test]
    fn sgld_reaches_unit_variance() {
        let mut rng = RngStream::new(1001);
        let mut sampler = sampler_for(SamplerSpec::Sgld { eta: 0.01 }, 1, &mut rng).unwrap();
        let (report, pass) = moment_test(sampler.as_mut(), 20_000, 200_000, &mut rng).unwrap();
        assert!(
            pass,
            "mean {:?}, variance {:?}",
            report.mean, report.variance
        );
    }

    #[test]
    fn wrong_noise_scale_fails_the_test() {
        // SGLD with the injected noise doubled: stationary variance ≈ 4,
        // which the tolerance check must reject.
        struct WrongScaleSgld {
            theta: ParamVector,
            eta: f64,
        }
        impl Sampler for WrongScaleSgld {
            fn dim(&self) -> usize {
                1
            }
            fn step(&mut self, rng: &mut RngStream) -> Result<&ParamVector, DiagnosticsError> {
                let zeta = rng.gaussian_vector(1);
                let amp = 2.0 * (2.0 * self.eta).sqrt();
                self.theta[0] += -self.eta * self.theta[0] + amp * zeta[0];
                Ok(&self.theta)
            }
        }
        let mut rng = RngStream::new(1002);
        let mut sampler = WrongScaleSgld {
            theta: ParamVector::zeros(1),
            eta: 0.01,
        };
        let (report, pass) = moment_test(&mut sampler, 10_000, 100_000, &mut rng).unwrap();
        assert!(!pass);
        assert!(report.variance[0] > 2.0, "variance {:?}", report.variance);
    }

    #[test]
    fn moment_test_is_seed_stable() {
        let run = |seed: u64| {
            let mut rng = RngStream::new(seed);
            let mut sampler =
                sampler_for(SamplerSpec::SantaEuler { eta: 1e-4 }, 2, &mut rng).unwrap();
            let (report, pass) = moment_test(sampler.as_mut(), 2_000, 20_000, &mut rng).unwrap();
            (report.mean, report.variance, pass)
        };
        let (m1, v1, p1) = run(7);
        let (m2, v2, p2) = run(7);
        assert_eq!(p1, p2);
        for (a, b) in m1.iter().zip(m2.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in v1.iter().zip(v2.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
