//! Experiment orchestration: runs the configured optimizer(s), writes trace
//! CSVs, per-seed summary lines, and experiment-level summary tables.
//! Identical (config, seed) pairs produce byte-identical trace and report
//! CSVs; wall-clock fields appear only in summary files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::baselines::{BaselineError, BaselineRun};
use crate::core::{ParamVector, RngStream, StepSchedule};
use crate::diagnostics::{
    integrator_bias, moment_test, sampler_for, DiagnosticsError, SamplerSpec,
};
use crate::objectives::{
    load_idx, BatchMode, Dataset, DoubleWell, FullBatch, GradientSource, IdxError, Minibatches,
    MlpClassifier, Objective, ObjectiveError, ScaledGradient, Split,
};
use crate::santa::{init_state_from, run as santa_run, SantaError, Scheme, Stage};

use super::config::{mnist_paths, ConfigError, ExperimentConfig, ExperimentKind, OptimizerChoice};
use super::trace::{CsvTraceSink, TraceRecord};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Santa(#[from] SantaError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Idx(#[from] IdxError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// What an experiment left on disk and whether any run diverged.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub diverged: bool,
    pub artifacts: Vec<PathBuf>,
    /// Human-readable one-liners, one per run (also written to summary.txt).
    pub summary_lines: Vec<String>,
}

#[derive(Debug, Clone)]
struct SeedResult {
    trace_path: PathBuf,
    summary_line: String,
    diverged: bool,
}

/// Runs the configured experiment, writing all artifacts under
/// `cfg.out_dir`. The process exit status should be nonzero iff this
/// returns Err or an outcome with `diverged` set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    match cfg.experiment {
        ExperimentKind::DoubleWell => double_well_experiment(cfg, &[cfg.optimizer]),
        ExperimentKind::Compare => double_well_experiment(
            cfg,
            &[
                OptimizerChoice::Santa,
                OptimizerChoice::Adam,
                OptimizerChoice::Rmsprop,
                OptimizerChoice::Sgd,
                OptimizerChoice::Sgdm,
                OptimizerChoice::Sgld,
            ],
        ),
        ExperimentKind::Classify => classify_experiment(cfg),
        ExperimentKind::SamplerCheck => sampler_check_experiment(cfg),
        ExperimentKind::IntegratorBias => integrator_bias_experiment(cfg),
    }
}

fn write_summary(out_dir: &Path, lines: &[String]) -> Result<PathBuf, HarnessError> {
    let path = out_dir.join("summary.txt");
    let mut file = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    for line in lines {
        writeln!(file, "{line}").map_err(io_err(&path))?;
    }
    file.flush().map_err(io_err(&path))?;
    Ok(path)
}

/// Runs `worker` over `seeds` seeds with up to `jobs` threads; results come
/// back ordered by seed so downstream output is deterministic.
fn map_seeds<R: Send>(
    seeds: u64,
    jobs: usize,
    worker: impl Fn(u64) -> Result<R, HarnessError> + Sync,
) -> Result<Vec<R>, HarnessError> {
    if jobs <= 1 || seeds <= 1 {
        return (0..seeds).map(&worker).collect();
    }
    let mut results: Vec<Option<Result<R, HarnessError>>> = (0..seeds).map(|_| None).collect();
    let next = std::sync::atomic::AtomicU64::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(seeds as usize) {
            scope.spawn(|| loop {
                let s = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if s >= seeds {
                    break;
                }
                let r = worker(s);
                let mut guard = slots.lock().expect("seed result mutex");
                guard[s as usize] = Some(r);
            });
        }
    });
    results
        .into_iter()
        .map(|slot| slot.expect("every seed worker ran"))
        .collect()
}

// ---------------------------------------------------------------------------
// double-well / compare
// ---------------------------------------------------------------------------

fn stage_tag_for_baseline(choice: OptimizerChoice) -> Stage {
    match choice {
        OptimizerChoice::Sgld | OptimizerChoice::Msgnht => Stage::Exploration,
        _ => Stage::Refinement,
    }
}

fn beta_for_baseline(cfg: &ExperimentConfig, choice: OptimizerChoice) -> f64 {
    match choice {
        OptimizerChoice::Msgnht => cfg.beta_temp,
        OptimizerChoice::Sgld => 1.0,
        _ => 0.0,
    }
}

/// Per-optimizer config patch used by the compare experiment: every
/// optimizer runs its own documented default rate.
fn compare_patch(cfg: &ExperimentConfig, choice: OptimizerChoice) -> ExperimentConfig {
    let mut patched = cfg.clone();
    patched.optimizer = choice;
    patched.step_schedule = super::config::default_compare_schedule(choice);
    patched.sigma = match choice {
        OptimizerChoice::Santa => 0.99999,
        _ => 0.99,
    };
    patched
}

fn double_well_experiment(
    cfg: &ExperimentConfig,
    optimizers: &[OptimizerChoice],
) -> Result<ExperimentOutcome, HarnessError> {
    let mut outcome = ExperimentOutcome {
        diverged: false,
        artifacts: Vec::new(),
        summary_lines: Vec::new(),
    };
    for &choice in optimizers {
        let run_cfg = if cfg.experiment == ExperimentKind::Compare {
            compare_patch(cfg, choice)
        } else {
            cfg.clone()
        };
        let results = map_seeds(cfg.seeds, cfg.jobs, |s| {
            double_well_seed(&run_cfg, choice, cfg.seed + s)
        })?;
        for r in results {
            outcome.diverged |= r.diverged;
            outcome.artifacts.push(r.trace_path);
            outcome.summary_lines.push(r.summary_line);
        }
    }
    let summary = write_summary(&cfg.out_dir, &outcome.summary_lines)?;
    outcome.artifacts.push(summary);
    Ok(outcome)
}

fn double_well_seed(
    cfg: &ExperimentConfig,
    choice: OptimizerChoice,
    seed: u64,
) -> Result<SeedResult, HarnessError> {
    let start = Instant::now();
    let objective = DoubleWell;
    let trace_path = cfg
        .out_dir
        .join(format!("{}-seed{}.csv", choice.name(), seed));
    let mut sink = CsvTraceSink::create(&trace_path, 1, cfg.stride, cfg.full_theta)
        .map_err(io_err(&trace_path))?;
    let theta0 = ParamVector::from_vec(vec![cfg.theta0]).map_err(SantaError::from)?;
    let mut rng = RngStream::new(seed);

    let (final_theta, diverged_at): (f64, Option<u64>) = match choice {
        OptimizerChoice::Santa => {
            let santa_cfg = cfg.santa_config(1)?;
            let mut state = init_state_from(theta0, &santa_cfg, &mut rng)?;
            let mut source = FullBatch(&objective);
            match santa_run(
                &mut state,
                &mut source,
                &santa_cfg,
                &mut rng,
                cfg.total_steps,
                &mut sink,
            ) {
                Ok(()) => (state.theta[0], None),
                Err(SantaError::Divergence { step, .. } | SantaError::BadGradient { step }) => {
                    (state.theta[0], Some(step))
                }
                Err(e) => return Err(e.into()),
            }
        }
        _ => {
            let bl_cfg = cfg.baseline_config(choice)?;
            let mut run = BaselineRun::new(bl_cfg, theta0)?;
            let stage = stage_tag_for_baseline(choice);
            let beta = beta_for_baseline(cfg, choice);
            let mut divergence = None;
            for _ in 0..cfg.total_steps {
                let (u_val, f) = match objective.eval_full(&run.theta) {
                    Ok(pair) => pair,
                    Err(ObjectiveError::Core(crate::core::CoreError::NonFinite { .. })) => {
                        divergence = Some(run.t + 1);
                        break;
                    }
                    Err(e) => return Err(e.into()),
                };
                let grad_norm = f.norm();
                let eta_t = run.cfg.eta.eta_at(run.t + 1).map_err(ConfigError::from)?;
                match run.step(&f, &mut rng) {
                    Ok(()) => {}
                    Err(BaselineError::Divergence { step }) => {
                        divergence = Some(step);
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
                sink.record_row(TraceRecord {
                    step: run.t,
                    stage,
                    beta,
                    eta: eta_t,
                    u_value: u_val,
                    grad_norm,
                    u_norm: run.momentum_norm(),
                    theta: Some(run.theta.as_slice().to_vec()),
                });
            }
            (run.theta[0], divergence)
        }
    };

    let trace_path = sink.finish().map_err(io_err(&trace_path))?;
    let (final_u, _) = crate::objectives::double_well_eval(final_theta);
    let wall = start.elapsed().as_secs_f64();
    let status = match diverged_at {
        None => "OK".to_string(),
        Some(step) => format!("DIVERGED step={step}"),
    };
    let summary_line = format!(
        "experiment={} optimizer={} seed={} status={} final_u={} final_theta={} wall_s={:.3}",
        cfg.experiment.name(),
        choice.name(),
        seed,
        status,
        final_u,
        final_theta,
        wall
    );
    write_seed_summary(&trace_path, &summary_line)?;
    Ok(SeedResult {
        trace_path,
        summary_line,
        diverged: diverged_at.is_some(),
    })
}

fn write_seed_summary(trace_path: &Path, line: &str) -> Result<(), HarnessError> {
    let path = trace_path.with_extension("summary.txt");
    std::fs::write(&path, format!("{line}\n")).map_err(io_err(&path))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

fn load_mnist(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset), HarnessError> {
    let [train_x, train_y, test_x, test_y] = mnist_paths(&cfg.data_dir)?;
    let mut train = load_idx(&train_x, &train_y, Split::Train)?;
    let test = load_idx(&test_x, &test_y, Split::Test)?;
    if cfg.train_subset > 0 && cfg.train_subset < train.len() {
        let rows: Vec<usize> = (0..cfg.train_subset).collect();
        train = train.subset(&rows, Split::Train)?;
    }
    Ok((train, test))
}

fn classify_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    let (train, test) = load_mnist(cfg)?;
    let mut outcome = ExperimentOutcome {
        diverged: false,
        artifacts: Vec::new(),
        summary_lines: Vec::new(),
    };
    let results = map_seeds(cfg.seeds, cfg.jobs, |s| {
        classify_seed(cfg, &train, &test, cfg.seed + s)
    })?;
    for r in results {
        outcome.diverged |= r.diverged;
        outcome.artifacts.push(r.trace_path);
        outcome.summary_lines.push(r.summary_line);
    }
    let summary = write_summary(&cfg.out_dir, &outcome.summary_lines)?;
    outcome.artifacts.push(summary);
    Ok(outcome)
}

struct EpochLog {
    writer: BufWriter<File>,
    path: PathBuf,
}

impl EpochLog {
    fn create(path: PathBuf) -> Result<Self, HarnessError> {
        let mut writer = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        writeln!(writer, "epoch,train_loss,test_error").map_err(io_err(&path))?;
        Ok(Self { writer, path })
    }

    fn record(
        &mut self,
        epoch: u64,
        mlp: &MlpClassifier,
        theta: &ParamVector,
        test: &Dataset,
    ) -> Result<(f64, f64), HarnessError> {
        let (u_full, _) = mlp.eval_full(theta)?;
        let train_loss = u_full / mlp.n_data() as f64;
        let test_error = mlp.test_error(theta, test);
        writeln!(self.writer, "{epoch},{train_loss},{test_error}").map_err(io_err(&self.path))?;
        Ok((train_loss, test_error))
    }

    fn finish(mut self) -> Result<PathBuf, HarnessError> {
        self.writer.flush().map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

/// Runs one (optimizer, seed) classify trajectory. Returns the final test
/// error alongside the artifacts. Santa sees the likelihood-scaled gradient
/// f̃ = (N/m)·Σ∇ℓ (its 1/N² preconditioner factor expects that scale);
/// baselines receive the mean gradient f̃/N matching their conventional
/// learning rates.
pub fn classify_seed_detailed(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<(SeedArtifacts, f64), HarnessError> {
    let start = Instant::now();
    let n = train.len();
    let mlp = MlpClassifier::new(cfg.layers.clone(), train.clone(), cfg.prior)?;
    let batches_per_epoch = (n / cfg.batch).max(1) as u64;
    let total_steps = cfg.epochs * batches_per_epoch;
    let burnin = if cfg.burnin_explicit {
        cfg.burnin
    } else {
        (total_steps / 2).max(1)
    };

    let mut rng = RngStream::new(seed);
    let mut init_rng = rng.split(1);
    let theta0 = mlp.init_params(&mut init_rng);

    let choice = cfg.optimizer;
    let trace_path = cfg
        .out_dir
        .join(format!("{}-seed{}.csv", choice.name(), seed));
    let epoch_path = cfg
        .out_dir
        .join(format!("{}-seed{}-epochs.csv", choice.name(), seed));
    let mut sink = CsvTraceSink::create(&trace_path, mlp.dim(), cfg.stride, cfg.full_theta)
        .map_err(io_err(&trace_path))?;
    let mut epochs_log = EpochLog::create(epoch_path)?;

    let mut diverged_at = None;
    let mut final_test_error = f64::NAN;

    match choice {
        OptimizerChoice::Santa => {
            let mut santa_cfg = cfg.santa_config(n)?;
            santa_cfg.burnin = burnin;
            let mut state = init_state_from(theta0, &santa_cfg, &mut rng)?;
            let mut source = Minibatches::new(&mlp, cfg.batch, BatchMode::Epoch)?;
            'epochs: for epoch in 1..=cfg.epochs {
                match santa_run(
                    &mut state,
                    &mut source,
                    &santa_cfg,
                    &mut rng,
                    batches_per_epoch,
                    &mut sink,
                ) {
                    Ok(()) => {}
                    Err(SantaError::Divergence { step, .. } | SantaError::BadGradient { step }) => {
                        diverged_at = Some(step);
                        break 'epochs;
                    }
                    Err(e) => return Err(e.into()),
                }
                let (_, te) = epochs_log.record(epoch, &mlp, &state.theta, test)?;
                final_test_error = te;
            }
        }
        _ => {
            let bl_cfg = cfg.baseline_config(choice)?;
            let mut run = BaselineRun::new(bl_cfg, theta0)?;
            let mut source = ScaledGradient {
                inner: Minibatches::new(&mlp, cfg.batch, BatchMode::Epoch)?,
                factor: 1.0 / n as f64,
            };
            let stage = stage_tag_for_baseline(choice);
            let beta = beta_for_baseline(cfg, choice);
            'epochs_b: for epoch in 1..=cfg.epochs {
                for _ in 0..batches_per_epoch {
                    let (u_val, f) = source.eval(run.t + 1, &run.theta, &mut rng)?;
                    let grad_norm = f.norm();
                    let eta_t = run.cfg.eta.eta_at(run.t + 1).map_err(ConfigError::from)?;
                    match run.step(&f, &mut rng) {
                        Ok(()) => {}
                        Err(BaselineError::Divergence { step }) => {
                            diverged_at = Some(step);
                            break 'epochs_b;
                        }
                        Err(e) => return Err(e.into()),
                    }
                    sink.record_row(TraceRecord {
                        step: run.t,
                        stage,
                        beta,
                        eta: eta_t,
                        u_value: u_val,
                        grad_norm,
                        u_norm: run.momentum_norm(),
                        theta: None,
                    });
                }
                let (_, te) = epochs_log.record(epoch, &mlp, &run.theta, test)?;
                final_test_error = te;
            }
        }
    }

    let trace_path = sink.finish().map_err(io_err(&trace_path))?;
    let epoch_path = epochs_log.finish()?;
    let wall = start.elapsed().as_secs_f64();
    let status = match diverged_at {
        None => "OK".to_string(),
        Some(step) => format!("DIVERGED step={step}"),
    };
    let summary_line = format!(
        "experiment=classify optimizer={} seed={} status={} epochs={} train_n={} test_error={} wall_s={:.3}",
        choice.name(),
        seed,
        status,
        cfg.epochs,
        n,
        final_test_error,
        wall
    );
    write_seed_summary(&trace_path, &summary_line)?;
    Ok((
        SeedArtifacts {
            seed,
            trace_path,
            extra: vec![epoch_path],
            summary_line,
            diverged: diverged_at.is_some(),
        },
        final_test_error,
    ))
}

/// Artifacts of one run, returned by the detailed classify entry point.
#[derive(Debug, Clone)]
pub struct SeedArtifacts {
    pub seed: u64,
    pub trace_path: PathBuf,
    pub extra: Vec<PathBuf>,
    pub summary_line: String,
    pub diverged: bool,
}

fn classify_seed(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<SeedResult, HarnessError> {
    let (artifacts, _) = classify_seed_detailed(cfg, train, test, seed)?;
    Ok(SeedResult {
        trace_path: artifacts.trace_path,
        summary_line: artifacts.summary_line,
        diverged: artifacts.diverged,
    })
}

// ---------------------------------------------------------------------------
// sampler-check
// ---------------------------------------------------------------------------

fn sampler_check_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    let StepSchedule::Constant(santa_eta) = cfg.step_schedule else {
        return Err(ConfigError::Constraint {
            keys: vec!["eta".to_string()],
            message: "sampler-check needs a constant eta".to_string(),
        }
        .into());
    };
    let dim = 2usize;
    let report_path = cfg.out_dir.join("sampler-check.csv");
    let mut file = BufWriter::new(File::create(&report_path).map_err(io_err(&report_path))?);
    writeln!(file, "sampler,seed,coordinate,mean,variance,pass").map_err(io_err(&report_path))?;

    let santa_spec = match cfg.scheme {
        Scheme::Euler => SamplerSpec::SantaEuler { eta: santa_eta },
        Scheme::Sss => SamplerSpec::SantaSss { eta: santa_eta },
    };
    let specs: [(&str, SamplerSpec); 3] = [
        ("santa", santa_spec),
        ("sgld", SamplerSpec::Sgld { eta: cfg.sgld_eta }),
        (
            "msgnht",
            SamplerSpec::Msgnht {
                eta: cfg.msgnht_eta,
            },
        ),
    ];

    let mut all_pass = true;
    let mut lines = Vec::new();
    for (name, spec) in specs {
        for s in 0..cfg.seeds {
            let seed = cfg.seed + s;
            let mut rng = RngStream::new(seed);
            let mut sampler = sampler_for(spec, dim, &mut rng)?;
            let (report, pass) = moment_test(
                sampler.as_mut(),
                cfg.warmup as usize,
                cfg.samples as usize,
                &mut rng,
            )?;
            all_pass &= pass;
            for c in 0..dim {
                writeln!(
                    file,
                    "{name},{seed},{c},{},{},{}",
                    report.mean[c], report.variance[c], pass
                )
                .map_err(io_err(&report_path))?;
            }
            lines.push(format!(
                "experiment=sampler-check sampler={name} seed={seed} pass={pass} worst_mean={} worst_var_gap={}",
                report.worst_mean(),
                report.worst_variance_gap()
            ));
        }
    }
    file.flush().map_err(io_err(&report_path))?;
    lines.push(format!("experiment=sampler-check overall_pass={all_pass}"));
    let summary = write_summary(&cfg.out_dir, &lines)?;
    Ok(ExperimentOutcome {
        diverged: false,
        artifacts: vec![report_path, summary],
        summary_lines: lines,
    })
}

// ---------------------------------------------------------------------------
// integrator-bias
// ---------------------------------------------------------------------------

fn integrator_bias_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    let report_path = cfg.out_dir.join("integrator-bias.csv");
    let mut file = BufWriter::new(File::create(&report_path).map_err(io_err(&report_path))?);
    writeln!(file, "scheme,h,seed,bias").map_err(io_err(&report_path))?;
    let dim = 4usize;
    let mut lines = Vec::new();
    for (name, scheme) in [("euler", Scheme::Euler), ("sss", Scheme::Sss)] {
        for s in 0..cfg.seeds {
            let seed = cfg.seed + s;
            let points = integrator_bias(scheme, &cfg.h_grid, dim, cfg.warmup, cfg.samples, seed)?;
            for p in &points {
                match p.bias {
                    Some(b) => {
                        writeln!(file, "{name},{},{seed},{b}", p.h).map_err(io_err(&report_path))?
                    }
                    None => writeln!(file, "{name},{},{seed},DIVERGED", p.h)
                        .map_err(io_err(&report_path))?,
                }
            }
            let rendered: Vec<String> = points
                .iter()
                .map(|p| match p.bias {
                    Some(b) => format!("h={} bias={b}", p.h),
                    None => format!("h={} DIVERGED", p.h),
                })
                .collect();
            lines.push(format!(
                "experiment=integrator-bias scheme={name} seed={seed} {}",
                rendered.join(" ")
            ));
        }
    }
    file.flush().map_err(io_err(&report_path))?;
    let summary = write_summary(&cfg.out_dir, &lines)?;
    Ok(ExperimentOutcome {
        diverged: false,
        artifacts: vec![report_path, summary],
        summary_lines: lines,
    })
}
