//! Basin-escape statistics on the double-well potential.
//!
//! Each seed starts at θ₀ = 4 (just uphill of the local well) and runs the
//! configured optimizer for a fixed number of steps; the final θ is
//! classified against the oracle-located minimizers.

use crate::baselines::{BaselineConfig, BaselineRun};
use crate::core::{ParamVector, RngStream};
use crate::objectives::{DoubleWell, FullBatch, Objective};
use crate::santa::{init_state_from, run, NullSink, SantaConfig};

use super::roots::{double_well_minima, DoubleWellRoots};
use super::DiagnosticsError;

/// Starting point for every basin-escape trajectory.
pub const BASIN_THETA0: f64 = 4.0;

#[derive(Debug, Clone)]
pub enum BasinOptimizer {
    Santa(SantaConfig),
    Baseline(BaselineConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasinOutcome {
    Global,
    Local,
    Other,
}

/// Outcome counts over a batch of seeds; the three buckets always sum to
/// `seeds_run`. Diverged trajectories land in `other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasinReport {
    pub seeds_run: u64,
    pub global_count: u64,
    pub local_count: u64,
    pub other_count: u64,
}

impl BasinReport {
    pub fn global_fraction(&self) -> f64 {
        self.global_count as f64 / self.seeds_run.max(1) as f64
    }

    pub fn local_fraction(&self) -> f64 {
        self.local_count as f64 / self.seeds_run.max(1) as f64
    }
}

/// Pure classification of a final parameter value against the two wells.
pub fn classify_basin(theta: f64, roots: &DoubleWellRoots, tol: f64) -> BasinOutcome {
    if (theta - roots.global_min).abs() < tol {
        BasinOutcome::Global
    } else if (theta - roots.local_min).abs() < tol {
        BasinOutcome::Local
    } else {
        BasinOutcome::Other
    }
}

fn final_theta(
    opt: &BasinOptimizer,
    seed: u64,
    t_steps: u64,
) -> Result<Option<f64>, DiagnosticsError> {
    let mut rng = RngStream::new(seed);
    let objective = DoubleWell;
    let theta0 = ParamVector::from_vec(vec![BASIN_THETA0])?;
    match opt {
        BasinOptimizer::Santa(cfg) => {
            let mut state = init_state_from(theta0, cfg, &mut rng)?;
            let mut source = FullBatch(&objective);
            match run(
                &mut state,
                &mut source,
                cfg,
                &mut rng,
                t_steps,
                &mut NullSink,
            ) {
                Ok(()) => Ok(Some(state.theta[0])),
                Err(
                    crate::santa::SantaError::Divergence { .. }
                    | crate::santa::SantaError::BadGradient { .. },
                ) => Ok(None),
                Err(e) => Err(e.into()),
            }
        }
        BasinOptimizer::Baseline(cfg) => {
            let mut run = BaselineRun::new(cfg.clone(), theta0)?;
            for _ in 0..t_steps {
                let f = match objective.eval_full(&run.theta) {
                    Ok((_, f)) => f,
                    // gradient overflow on a huge θ: the trajectory diverged
                    Err(crate::objectives::ObjectiveError::Core(
                        crate::core::CoreError::NonFinite { .. },
                    )) => return Ok(None),
                    Err(e) => return Err(e.into()),
                };
                match run.step(&f, &mut rng) {
                    Ok(()) => {}
                    Err(crate::baselines::BaselineError::Divergence { .. }) => return Ok(None),
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(Some(run.theta[0]))
        }
    }
}

/// Runs `seeds` independent trajectories (seeds `seed0 .. seed0 + seeds`)
/// of `t_steps` steps each and classifies the finishers.
pub fn basin_escape(
    opt: &BasinOptimizer,
    seed0: u64,
    seeds: u64,
    t_steps: u64,
    tol: f64,
) -> Result<BasinReport, DiagnosticsError> {
    let roots = double_well_minima();
    let mut report = BasinReport {
        seeds_run: seeds,
        global_count: 0,
        local_count: 0,
        other_count: 0,
    };
    for s in 0..seeds {
        let outcome = match final_theta(opt, seed0 + s, t_steps)? {
            Some(theta) => classify_basin(theta, &roots, tol),
            None => BasinOutcome::Other,
        };
        match outcome {
            BasinOutcome::Global => report.global_count += 1,
            BasinOutcome::Local => report.local_count += 1,
            BasinOutcome::Other => report.other_count += 1,
        }
    }
    debug_assert_eq!(
        report.global_count + report.local_count + report.other_count,
        report.seeds_run
    );
    Ok(report)
}
