//! Multi-step driver emitting per-step reports to a sink.

use crate::core::{NoiseSource, ParamVector, RngStream};
use crate::objectives::GradientSource;

use super::config::SantaConfig;
use super::state::SantaState;
use super::step::{step, StepReport};
use super::SantaError;

/// Consumer of per-step trace data. `theta` is borrowed so sinks can decide
/// whether parameters are worth copying.
pub trait TraceSink {
    fn record(&mut self, report: &StepReport, u_value: f64, theta: &ParamVector);
}

/// Discards everything.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _report: &StepReport, _u_value: f64, _theta: &ParamVector) {}
}

/// Keeps every report and objective value (not θ).
#[derive(Default)]
pub struct CollectSink {
    pub reports: Vec<StepReport>,
    pub u_values: Vec<f64>,
}

impl TraceSink for CollectSink {
    fn record(&mut self, report: &StepReport, u_value: f64, _theta: &ParamVector) {
        self.reports.push(report.clone());
        self.u_values.push(u_value);
    }
}

/// Applies the configured scheme `total_steps` times, delivering every step's
/// report to the sink in order. Divergence aborts with the offending step
/// index; the sink keeps whatever was recorded before the failure.
pub fn run<G: GradientSource + ?Sized, S: TraceSink + ?Sized>(
    state: &mut SantaState,
    source: &mut G,
    cfg: &SantaConfig,
    rng: &mut RngStream,
    total_steps: u64,
    sink: &mut S,
) -> Result<(), SantaError> {
    run_with_noise(state, source, cfg, rng, total_steps, sink)
}

/// [`run`] over any noise source (tests substitute ζ ≡ 0 here).
pub fn run_with_noise<G: GradientSource + ?Sized, S: TraceSink + ?Sized>(
    state: &mut SantaState,
    source: &mut G,
    cfg: &SantaConfig,
    noise: &mut dyn NoiseSource,
    total_steps: u64,
    sink: &mut S,
) -> Result<(), SantaError> {
    for _ in 0..total_steps {
        let (report, u_value) = step(state, source, cfg, noise)?;
        sink.record(&report, u_value, &state.theta);
    }
    Ok(())
}
