//! Flat key=value experiment configuration with CLI overrides.
//!
//! Precedence, lowest to highest: per-experiment defaults (or a named
//! preset), the config file, CLI overrides. The `SANTA_OPT_SEED`
//! environment variable seeds runs only when no file or CLI seed is given.
//! Unknown keys are errors; every key and default is listed in `--help`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::baselines::{BaselineConfig, BaselineKind};
use crate::core::{AnnealSchedule, StepSchedule};
use crate::santa::{NoiseExponent, NoiseG, SantaConfig, Scheme};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line_no} is not `key = value`: {line:?}")]
    Malformed { line_no: usize, line: String },
    #[error("unknown config key {key:?}")]
    UnknownKey { key: String },
    #[error("key {key:?}: cannot parse {value:?} as {expected}")]
    TypeMismatch {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("constraint violated ({}): {message}", keys.join(", "))]
    Constraint { keys: Vec<String>, message: String },
    #[error("dataset file not found: {path}")]
    MissingData { path: String },
    #[error(transparent)]
    Core(#[from] crate::core::CoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    DoubleWell,
    Classify,
    SamplerCheck,
    IntegratorBias,
    Compare,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DoubleWell => "double-well",
            ExperimentKind::Classify => "classify",
            ExperimentKind::SamplerCheck => "sampler-check",
            ExperimentKind::IntegratorBias => "integrator-bias",
            ExperimentKind::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerChoice {
    Santa,
    Sgd,
    Sgdm,
    Sgld,
    Rmsprop,
    Adam,
    Msgnht,
}

impl OptimizerChoice {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerChoice::Santa => "santa",
            OptimizerChoice::Sgd => "sgd",
            OptimizerChoice::Sgdm => "sgdm",
            OptimizerChoice::Sgld => "sgld",
            OptimizerChoice::Rmsprop => "rmsprop",
            OptimizerChoice::Adam => "adam",
            OptimizerChoice::Msgnht => "msgnht",
        }
    }

    pub fn baseline_kind(self) -> Option<BaselineKind> {
        match self {
            OptimizerChoice::Santa => None,
            OptimizerChoice::Sgd => Some(BaselineKind::Sgd),
            OptimizerChoice::Sgdm => Some(BaselineKind::Sgdm),
            OptimizerChoice::Sgld => Some(BaselineKind::Sgld),
            OptimizerChoice::Rmsprop => Some(BaselineKind::Rmsprop),
            OptimizerChoice::Adam => Some(BaselineKind::Adam),
            OptimizerChoice::Msgnht => Some(BaselineKind::Msgnht),
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub optimizer: OptimizerChoice,
    pub seed: u64,
    pub seeds: u64,
    pub total_steps: u64,
    pub burnin: u64,
    /// Whether the burnin key was given explicitly (classify otherwise
    /// derives burnin as half its epoch-derived step count).
    pub burnin_explicit: bool,
    pub out_dir: PathBuf,
    pub stride: u64,
    pub full_theta: bool,
    pub jobs: usize,
    pub theta0: f64,
    pub tol: f64,
    pub step_schedule: StepSchedule,
    pub anneal: AnnealSchedule,
    /// Constant inverse temperature for mSGNHT (and the Constant anneal mode).
    pub beta_temp: f64,
    // Santa knobs
    pub sigma: f64,
    pub lambda: f64,
    pub c0: f64,
    pub scheme: Scheme,
    pub metric_term: bool,
    pub noise_g: NoiseG,
    pub noise_exponent: NoiseExponent,
    pub u_guard: f64,
    pub g_pin: Option<f64>,
    // Baseline knobs
    pub momentum: f64,
    pub b1: f64,
    pub b2: f64,
    pub bias_correction: bool,
    // classify
    pub data_dir: PathBuf,
    pub layers: Vec<usize>,
    pub batch: usize,
    pub epochs: u64,
    pub train_subset: usize,
    pub prior: f64,
    // sampler-check / integrator-bias
    pub warmup: u64,
    pub samples: u64,
    pub sgld_eta: f64,
    pub msgnht_eta: f64,
    pub h_grid: Vec<f64>,
}

impl ExperimentConfig {
    /// The Santa configuration this experiment config describes, with the
    /// dataset size `n_data` supplied by the experiment.
    pub fn santa_config(&self, n_data: usize) -> Result<SantaConfig, ConfigError> {
        let cfg = SantaConfig {
            sigma: self.sigma,
            lambda: self.lambda,
            n_data,
            burnin: self.burnin,
            c0: self.c0,
            anneal: self.anneal.clone(),
            step: self.step_schedule.clone(),
            scheme: self.scheme,
            include_metric_grad_term: self.metric_term,
            noise_g: self.noise_g,
            u_guard: self.u_guard,
            noise_exponent: self.noise_exponent,
            g_pin: self.g_pin,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The baseline configuration for `choice` (not Santa) at this config's
    /// schedule.
    pub fn baseline_config(&self, choice: OptimizerChoice) -> Result<BaselineConfig, ConfigError> {
        let kind = choice
            .baseline_kind()
            .expect("baseline_config called for a baseline choice");
        let mut cfg = BaselineConfig::new(kind, self.step_schedule.clone());
        cfg.momentum = self.momentum;
        cfg.sigma = self.sigma_for_baselines();
        cfg.lambda = self.lambda;
        cfg.b1 = self.b1;
        cfg.b2 = self.b2;
        cfg.beta = self.beta_temp;
        cfg.bias_correction = self.bias_correction;
        cfg.validate()?;
        Ok(cfg)
    }

    /// RMSprop/Adam smoothing: the shared `sigma` key, except that Santa's
    /// default of 0.999 is replaced by the conventional 0.99 when the key
    /// was not set explicitly (handled at parse time).
    fn sigma_for_baselines(&self) -> f64 {
        self.sigma
    }
}

/// Parses `key = value` lines (with `#` comments) into an ordered map.
/// Later occurrences of a key override earlier ones.
pub fn parse_kv_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                line_no: idx + 1,
                line: raw.to_string(),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Malformed {
                line_no: idx + 1,
                line: raw.to_string(),
            });
        }
        map.insert(key, value);
    }
    Ok(map)
}

/// All recognized keys, with their documented defaults.
pub const KEY_HELP: &str = "\
Config keys (key = value per line, # comments; CLI --set overrides files):
  preset          sec5.1-doublewell | sec5.2-fnn-small (bundle of defaults)
  experiment      double-well | classify | sampler-check | integrator-bias | compare
                  (default double-well)
  optimizer       santa | sgd | sgdm | sgld | rmsprop | adam | msgnht (default santa)
  seed            base RNG seed (default 1; env SANTA_OPT_SEED is the fallback)
  seeds           number of independent seeds (default 1; sampler-check 3,
                  integrator-bias 5)
  T               total steps (default 4000; classify derives T from epochs)
  burnin          first refinement step (default T/2)
  out             output directory (default runs)
  stride          trace row stride (default 1)
  full-theta      force theta columns in traces (default false; auto when p <= 8)
  jobs            parallel seed jobs (default 1)
  theta0          double-well start (default 4)
  tol             basin classification tolerance (default 0.15)
  eta             constant learning rate (per-optimizer default, see below)
  h               constant stepsize h, eta = h^2
  h-decay-c/h-decay-k      h_t = c*t^-k (eta_t = h_t^2); double-well santa
                           default c = 0.1, k = 0.3
  eta-decay-c/eta-decay-k  eta_t = c*t^-k
  anneal-a        power-law anneal coefficient A (default 1)
  anneal-gamma    power-law anneal exponent (double-well 2, classify 0.5)
  beta            constant inverse temperature: Santa constant-anneal mode and
                  the mSGNHT thermostat (default 1)
  scheme          sss | euler (default sss)
  sigma           second-moment smoothing (santa 0.999, but 0.99999 on
                  double-well/compare and 0.5 on classify; rmsprop/adam 0.99)
  lambda          preconditioner stabilizer (default 1e-8; classify santa 0.01)
  c0              thermostat init constant C (default 5; double-well 1,
                  classify santa 500)
  metric-term     include the metric-gradient term (default false)
  noise-g         prev | <const> noise multiplier (default prev)
  noise-exponent  1 | 1.5 eta power in the noise amplitude (default 1;
                  classify santa 1.5)
  u-guard         metric-term division guard (default 1e-8)
  g-pin           none | <const> pin the preconditioner (default none)
  momentum        sgdm friction / msgnht thermostat start (defaults 0.1 / 1.0)
  b1, b2          adam moment rates (defaults 0.1, 0.999)
  bias-correction adam bias correction (default false)
  data            IDX data directory (default data/mnist)
  layers          dash-separated layer sizes (default 784-100-10)
  m               minibatch size (default 100)
  epochs          classify epochs (default 10)
  train-subset    use only the first n training rows (0 = all, default 0)
  prior           Gaussian prior precision for classify (default 0)
  warmup          sampler warmup steps (sampler-check 50000, bias 20000)
  samples         recorded sampler steps (default 200000)
  sgld-eta        sampler-check SGLD rate (default 0.01)
  msgnht-eta      sampler-check mSGNHT rate (default 0.01)
  h-grid          comma-separated stepsizes for integrator-bias
                  (default 0.05,0.1,0.2)

Per-optimizer eta defaults: double-well/compare — santa h_t = 0.1*t^-0.3,
rmsprop 5e-4, adam 1e-3, others 0.01; classify — santa 4e-6, sgd/sgdm/sgld 0.5,
rmsprop 5e-4, adam 1e-3, msgnht 0.5; sampler-check — santa 1e-4.";

const KNOWN_KEYS: &[&str] = &[
    "preset",
    "experiment",
    "optimizer",
    "seed",
    "seeds",
    "T",
    "burnin",
    "out",
    "stride",
    "full-theta",
    "jobs",
    "theta0",
    "tol",
    "eta",
    "h",
    "h-decay-c",
    "h-decay-k",
    "eta-decay-c",
    "eta-decay-k",
    "anneal-a",
    "anneal-gamma",
    "beta",
    "scheme",
    "sigma",
    "lambda",
    "c0",
    "metric-term",
    "noise-g",
    "noise-exponent",
    "u-guard",
    "g-pin",
    "momentum",
    "b1",
    "b2",
    "bias-correction",
    "data",
    "layers",
    "m",
    "epochs",
    "train-subset",
    "prior",
    "warmup",
    "samples",
    "sgld-eta",
    "msgnht-eta",
    "h-grid",
];

fn preset_map(name: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let pairs: &[(&str, &str)] = match name {
        "sec5.1-doublewell" => &[("experiment", "double-well"), ("optimizer", "santa")],
        "sec5.2-fnn-small" => &[
            ("experiment", "classify"),
            ("optimizer", "santa"),
            ("layers", "784-100-10"),
            ("m", "100"),
            ("epochs", "10"),
        ],
        other => {
            return Err(ConfigError::TypeMismatch {
                key: "preset".to_string(),
                value: other.to_string(),
                expected: "sec5.1-doublewell or sec5.2-fnn-small",
            })
        }
    };
    Ok(pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}

struct Lookup<'a> {
    map: &'a BTreeMap<String, String>,
}

impl<'a> Lookup<'a> {
    fn str(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(
        &self,
        key: &str,
        expected: &'static str,
    ) -> Result<Option<T>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| ConfigError::TypeMismatch {
                    key: key.to_string(),
                    value: v.clone(),
                    expected,
                }),
        }
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse(key, "a real number")
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.parse(key, "a non-negative integer")
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.parse(key, "a non-negative integer")
    }

    fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => match v.as_str() {
                "true" | "on" | "yes" | "1" => Ok(Some(true)),
                "false" | "off" | "no" | "0" => Ok(Some(false)),
                _ => Err(ConfigError::TypeMismatch {
                    key: key.to_string(),
                    value: v.clone(),
                    expected: "true or false",
                }),
            },
        }
    }
}

/// The documented per-optimizer default rate used by the compare experiment.
pub fn default_compare_schedule(optimizer: OptimizerChoice) -> StepSchedule {
    default_schedule(ExperimentKind::Compare, optimizer)
        .expect("compare default schedules are valid")
}

fn default_schedule(
    experiment: ExperimentKind,
    optimizer: OptimizerChoice,
) -> Result<StepSchedule, ConfigError> {
    use ExperimentKind::*;
    use OptimizerChoice::*;
    let schedule = match (experiment, optimizer) {
        (DoubleWell | Compare, Santa) => StepSchedule::power_decay(0.1, 0.3, true)?,
        (DoubleWell | Compare, Rmsprop) => StepSchedule::constant(5e-4)?,
        (DoubleWell | Compare, Adam) => StepSchedule::constant(1e-3)?,
        (DoubleWell | Compare, _) => StepSchedule::constant(0.01)?,
        (Classify, Santa) => StepSchedule::constant(4e-6)?,
        (Classify, Rmsprop) => StepSchedule::constant(5e-4)?,
        (Classify, Adam) => StepSchedule::constant(1e-3)?,
        (Classify, _) => StepSchedule::constant(0.5)?,
        (SamplerCheck | IntegratorBias, _) => StepSchedule::constant(1e-4)?,
    };
    Ok(schedule)
}

fn parse_experiment(value: &str) -> Result<ExperimentKind, ConfigError> {
    Ok(match value {
        "double-well" => ExperimentKind::DoubleWell,
        "classify" => ExperimentKind::Classify,
        "sampler-check" => ExperimentKind::SamplerCheck,
        "integrator-bias" => ExperimentKind::IntegratorBias,
        "compare" => ExperimentKind::Compare,
        other => {
            return Err(ConfigError::TypeMismatch {
                key: "experiment".to_string(),
                value: other.to_string(),
                expected: "double-well, classify, sampler-check, integrator-bias, or compare",
            })
        }
    })
}

fn parse_optimizer(value: &str) -> Result<OptimizerChoice, ConfigError> {
    Ok(match value {
        "santa" => OptimizerChoice::Santa,
        "sgd" => OptimizerChoice::Sgd,
        "sgdm" => OptimizerChoice::Sgdm,
        "sgld" => OptimizerChoice::Sgld,
        "rmsprop" => OptimizerChoice::Rmsprop,
        "adam" => OptimizerChoice::Adam,
        "msgnht" => OptimizerChoice::Msgnht,
        other => {
            return Err(ConfigError::TypeMismatch {
                key: "optimizer".to_string(),
                value: other.to_string(),
                expected: "santa, sgd, sgdm, sgld, rmsprop, adam, or msgnht",
            })
        }
    })
}

/// Builds the resolved config from merged key maps. `file_map` comes from
/// the config file (may be empty), `cli_map` from command-line overrides;
/// `env_seed` is the lowest-precedence seed source.
pub fn resolve_config(
    file_map: BTreeMap<String, String>,
    cli_map: BTreeMap<String, String>,
    env_seed: Option<u64>,
) -> Result<ExperimentConfig, ConfigError> {
    // Merge for preset/experiment discovery: CLI wins.
    let mut merged = file_map.clone();
    for (k, v) in &cli_map {
        merged.insert(k.clone(), v.clone());
    }
    for key in merged.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key: key.clone() });
        }
    }

    let mut base = match merged.get("preset") {
        Some(name) => preset_map(name)?,
        None => BTreeMap::new(),
    };
    for (k, v) in file_map {
        if k != "preset" {
            base.insert(k, v);
        }
    }
    for (k, v) in cli_map {
        if k != "preset" {
            base.insert(k, v);
        }
    }
    let look = Lookup { map: &base };

    let experiment = match look.str("experiment") {
        Some(v) => parse_experiment(v)?,
        None => ExperimentKind::DoubleWell,
    };
    let optimizer = match look.str("optimizer") {
        Some(v) => parse_optimizer(v)?,
        None => OptimizerChoice::Santa,
    };

    let dw_like = matches!(
        experiment,
        ExperimentKind::DoubleWell | ExperimentKind::Compare
    );
    let classify_santa =
        experiment == ExperimentKind::Classify && optimizer == OptimizerChoice::Santa;

    // Schedule: eta > h > h-decay > eta-decay > per-experiment default.
    let step_schedule = if let Some(eta) = look.f64("eta")? {
        StepSchedule::constant(eta)?
    } else if let Some(h) = look.f64("h")? {
        StepSchedule::constant(h * h)?
    } else if look.str("h-decay-c").is_some() || look.str("h-decay-k").is_some() {
        let c = look.f64("h-decay-c")?.unwrap_or(0.1);
        let k = look.f64("h-decay-k")?.unwrap_or(0.3);
        StepSchedule::power_decay(c, k, true)?
    } else if look.str("eta-decay-c").is_some() || look.str("eta-decay-k").is_some() {
        let c = look.f64("eta-decay-c")?.unwrap_or(0.1);
        let k = look.f64("eta-decay-k")?.unwrap_or(0.3);
        StepSchedule::power_decay(c, k, false)?
    } else {
        default_schedule(experiment, optimizer)?
    };

    let beta_temp = look.f64("beta")?.unwrap_or(1.0);
    let anneal = if look.str("beta").is_some() {
        AnnealSchedule::constant(beta_temp)?
    } else {
        let a = look.f64("anneal-a")?.unwrap_or(1.0);
        let gamma = look.f64("anneal-gamma")?.unwrap_or(match experiment {
            ExperimentKind::Classify => 0.5,
            _ => 2.0,
        });
        AnnealSchedule::power_law(a, gamma)?
    };

    // classify derives T from epochs at run time; set a placeholder here.
    let epochs = look.u64("epochs")?.unwrap_or(10);
    let batch = look.usize("m")?.unwrap_or(100);
    let total_steps = look.u64("T")?.unwrap_or(4000);
    let burnin_explicit = look.str("burnin").is_some();
    let burnin = look.u64("burnin")?.unwrap_or(total_steps / 2).max(1);

    let seed = match look.u64("seed")? {
        Some(s) => s,
        None => env_seed.unwrap_or(1),
    };
    let seeds = look.u64("seeds")?.unwrap_or(match experiment {
        ExperimentKind::SamplerCheck => 3,
        ExperimentKind::IntegratorBias => 5,
        _ => 1,
    });

    let scheme = match look.str("scheme") {
        None => Scheme::Sss,
        Some("sss") => Scheme::Sss,
        Some("euler") => Scheme::Euler,
        Some(other) => {
            return Err(ConfigError::TypeMismatch {
                key: "scheme".to_string(),
                value: other.to_string(),
                expected: "sss or euler",
            })
        }
    };
    let noise_g = match look.str("noise-g") {
        None | Some("prev") => NoiseG::UsePrevG,
        Some(v) => {
            let c: f64 = v.parse().map_err(|_| ConfigError::TypeMismatch {
                key: "noise-g".to_string(),
                value: v.to_string(),
                expected: "prev or a non-negative constant",
            })?;
            NoiseG::FixedConstant(c)
        }
    };
    let noise_exponent = match look.str("noise-exponent") {
        None if classify_santa => NoiseExponent::EtaThreeHalves,
        None | Some("1") => NoiseExponent::Eta,
        Some("1.5") => NoiseExponent::EtaThreeHalves,
        Some(other) => {
            return Err(ConfigError::TypeMismatch {
                key: "noise-exponent".to_string(),
                value: other.to_string(),
                expected: "1 or 1.5",
            })
        }
    };
    let g_pin = match look.str("g-pin") {
        None | Some("none") => None,
        Some(v) => Some(v.parse::<f64>().map_err(|_| ConfigError::TypeMismatch {
            key: "g-pin".to_string(),
            value: v.to_string(),
            expected: "none or a positive constant",
        })?),
    };

    // Smoothing default differs between Santa (0.999) and RMSprop/Adam
    // (0.99). The double-well preset needs a near-one σ: the short run keeps
    // v close to zero so the preconditioner stays strong, which is what
    // carries the particle over the barrier.
    let sigma = match look.f64("sigma")? {
        Some(s) => s,
        None => match optimizer {
            OptimizerChoice::Santa if dw_like => 0.99999,
            // the short classify runs need the second-moment average to
            // converge within a few steps
            OptimizerChoice::Santa if classify_santa => 0.5,
            OptimizerChoice::Santa => 0.999,
            _ => 0.99,
        },
    };
    // Thermostat start α₀ = √η·C. The double-well escape needs a gentle
    // start; the classify preset instead needs O(1) friction from step one
    // (the pinned η = 4e-6 makes √η tiny, and a 1000-step run is too short
    // for the thermostat to adapt from a near-zero start).
    let c0_default = if dw_like {
        1.0
    } else if classify_santa {
        500.0
    } else {
        5.0
    };
    let lambda_default = if classify_santa { 0.01 } else { 1e-8 };

    let layers_text = look.str("layers").unwrap_or("784-100-10");
    let layers: Vec<usize> = layers_text
        .split('-')
        .map(|part| {
            part.parse::<usize>()
                .map_err(|_| ConfigError::TypeMismatch {
                    key: "layers".to_string(),
                    value: layers_text.to_string(),
                    expected: "dash-separated positive integers like 784-100-10",
                })
        })
        .collect::<Result<_, _>>()?;

    let h_grid_text = look.str("h-grid").unwrap_or("0.05,0.1,0.2");
    let h_grid: Vec<f64> = h_grid_text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| ConfigError::TypeMismatch {
                    key: "h-grid".to_string(),
                    value: h_grid_text.to_string(),
                    expected: "comma-separated positive reals",
                })
        })
        .collect::<Result<_, _>>()?;

    let cfg = ExperimentConfig {
        experiment,
        optimizer,
        seed,
        seeds,
        total_steps,
        burnin,
        burnin_explicit,
        out_dir: PathBuf::from(look.str("out").unwrap_or("runs")),
        stride: look.u64("stride")?.unwrap_or(1).max(1),
        full_theta: look.bool("full-theta")?.unwrap_or(false),
        jobs: look.usize("jobs")?.unwrap_or(1).max(1),
        theta0: look.f64("theta0")?.unwrap_or(4.0),
        tol: look.f64("tol")?.unwrap_or(0.15),
        step_schedule,
        anneal,
        beta_temp,
        sigma,
        lambda: look.f64("lambda")?.unwrap_or(lambda_default),
        c0: look.f64("c0")?.unwrap_or(c0_default),
        scheme,
        metric_term: look.bool("metric-term")?.unwrap_or(false),
        noise_g,
        noise_exponent,
        u_guard: look.f64("u-guard")?.unwrap_or(1e-8),
        g_pin,
        momentum: look.f64("momentum")?.unwrap_or(match optimizer {
            OptimizerChoice::Msgnht => 1.0,
            _ => 0.1,
        }),
        b1: look.f64("b1")?.unwrap_or(0.1),
        b2: look.f64("b2")?.unwrap_or(0.999),
        bias_correction: look.bool("bias-correction")?.unwrap_or(false),
        data_dir: PathBuf::from(look.str("data").unwrap_or("data/mnist")),
        layers,
        batch,
        epochs,
        train_subset: look.usize("train-subset")?.unwrap_or(0),
        prior: look.f64("prior")?.unwrap_or(0.0),
        warmup: look.u64("warmup")?.unwrap_or(match experiment {
            ExperimentKind::IntegratorBias => 20_000,
            _ => 50_000,
        }),
        samples: look.u64("samples")?.unwrap_or(200_000),
        sgld_eta: look.f64("sgld-eta")?.unwrap_or(0.01),
        msgnht_eta: look.f64("msgnht-eta")?.unwrap_or(0.01),
        h_grid,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if cfg.total_steps == 0 {
        return Err(ConfigError::Constraint {
            keys: vec!["T".to_string()],
            message: "T must be at least 1".to_string(),
        });
    }
    if cfg.burnin > cfg.total_steps
        && matches!(
            cfg.experiment,
            ExperimentKind::DoubleWell | ExperimentKind::Compare
        )
    {
        return Err(ConfigError::Constraint {
            keys: vec!["burnin".to_string(), "T".to_string()],
            message: format!(
                "burnin ({}) must not exceed T ({})",
                cfg.burnin, cfg.total_steps
            ),
        });
    }
    if cfg.experiment == ExperimentKind::Classify {
        if cfg.layers.len() < 2 {
            return Err(ConfigError::Constraint {
                keys: vec!["layers".to_string()],
                message: "need at least input and output layers".to_string(),
            });
        }
        if cfg.batch == 0 {
            return Err(ConfigError::Constraint {
                keys: vec!["m".to_string()],
                message: "minibatch size must be at least 1".to_string(),
            });
        }
        if cfg.epochs == 0 {
            return Err(ConfigError::Constraint {
                keys: vec!["epochs".to_string()],
                message: "epochs must be at least 1".to_string(),
            });
        }
        mnist_paths(&cfg.data_dir)?;
    }
    if cfg.seeds == 0 {
        return Err(ConfigError::Constraint {
            keys: vec!["seeds".to_string()],
            message: "seeds must be at least 1".to_string(),
        });
    }
    if cfg.experiment == ExperimentKind::IntegratorBias && cfg.h_grid.is_empty() {
        return Err(ConfigError::Constraint {
            keys: vec!["h-grid".to_string()],
            message: "need at least one stepsize".to_string(),
        });
    }
    Ok(())
}

/// Locates the four standard MNIST-style IDX files under `dir`, accepting
/// plain or `.gz` names. Returns (train images, train labels, test images,
/// test labels).
pub fn mnist_paths(dir: &Path) -> Result<[PathBuf; 4], ConfigError> {
    let stems = [
        "train-images-idx3-ubyte",
        "train-labels-idx1-ubyte",
        "t10k-images-idx3-ubyte",
        "t10k-labels-idx1-ubyte",
    ];
    let mut out = Vec::with_capacity(4);
    for stem in stems {
        let plain = dir.join(stem);
        let gz = dir.join(format!("{stem}.gz"));
        if plain.exists() {
            out.push(plain);
        } else if gz.exists() {
            out.push(gz);
        } else {
            return Err(ConfigError::MissingData {
                path: plain.display().to_string(),
            });
        }
    }
    Ok([
        out[0].clone(),
        out[1].clone(),
        out[2].clone(),
        out[3].clone(),
    ])
}

/// Reads and resolves a config file plus CLI overrides.
pub fn parse_config_file(
    path: Option<&Path>,
    cli_map: BTreeMap<String, String>,
    env_seed: Option<u64>,
) -> Result<ExperimentConfig, ConfigError> {
    let file_map = match path {
        None => BTreeMap::new(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            parse_kv_text(&text)?
        }
    };
    resolve_config(file_map, cli_map, env_seed)
}
