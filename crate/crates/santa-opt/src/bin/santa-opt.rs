//! Command-line front end: `run` executes experiments from flat key=value
//! configs (plus CLI overrides), `check` runs the diagnostics suite, and
//! `plot-data` reshapes trace CSVs for external plotters.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use santa_opt::baselines::{BaselineConfig, BaselineKind};
use santa_opt::core::{ParamVector, RngStream, StepSchedule};
use santa_opt::diagnostics::{
    basin_escape, double_well_minima, grad_check, integrator_bias, moment_test, sampler_for,
    BasinOptimizer, SamplerSpec,
};
use santa_opt::harness::{
    emit_plot_data, parse_config_file, run_experiment, ExperimentConfig, KEY_HELP,
};
use santa_opt::objectives::{DoubleWell, Quadratic};
use santa_opt::santa::Scheme;

#[derive(Parser)]
#[command(
    name = "santa-opt",
    about = "Annealed-thermostat (Santa) optimizer, baselines, and experiments",
    after_long_help = KEY_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file and/or CLI overrides.
    Run(RunArgs),
    /// Run the diagnostics suite (gradient checks, sampler moments,
    /// integrator ordering, basin escape) at reduced budgets.
    Check(CheckArgs),
    /// Merge one column from several trace CSVs into tidy long format.
    PlotData(PlotDataArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value config file (see --help for keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment: double-well | classify | sampler-check | integrator-bias | compare.
    #[arg(long)]
    experiment: Option<String>,
    /// Optimizer: santa | sgd | sgdm | sgld | rmsprop | adam | msgnht.
    #[arg(long)]
    optimizer: Option<String>,
    /// Base RNG seed (lowest-precedence source is SANTA_OPT_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Total steps.
    #[arg(long = "T")]
    total_steps: Option<u64>,
    /// First refinement step.
    #[arg(long)]
    burnin: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parallel seed jobs.
    #[arg(long)]
    jobs: Option<usize>,
    /// Additional key=value overrides (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// Smaller sampling budgets (quick smoke pass).
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct PlotDataArgs {
    /// Comma-separated trace CSV paths.
    #[arg(long, value_delimiter = ',', required = true)]
    traces: Vec<PathBuf>,
    /// Column to extract (for example U).
    #[arg(long)]
    column: String,
    /// Output CSV path.
    #[arg(long, default_value = "plot-data.csv")]
    out: PathBuf,
}

fn cli_overrides(args: &RunArgs) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for pair in &args.set {
        let Some((k, v)) = pair.split_once('=') else {
            return Err(format!("--set expects KEY=VALUE, got {pair:?}"));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(v) = &args.experiment {
        map.insert("experiment".into(), v.clone());
    }
    if let Some(v) = &args.optimizer {
        map.insert("optimizer".into(), v.clone());
    }
    if let Some(v) = args.seed {
        map.insert("seed".into(), v.to_string());
    }
    if let Some(v) = args.total_steps {
        map.insert("T".into(), v.to_string());
    }
    if let Some(v) = args.burnin {
        map.insert("burnin".into(), v.to_string());
    }
    if let Some(v) = &args.out {
        map.insert("out".into(), v.display().to_string());
    }
    if let Some(v) = args.jobs {
        map.insert("jobs".into(), v.to_string());
    }
    Ok(map)
}

fn env_seed() -> Option<u64> {
    std::env::var("SANTA_OPT_SEED").ok()?.parse().ok()
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let overrides = match cli_overrides(&args) {
        Ok(m) => m,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cfg: ExperimentConfig =
        match parse_config_file(args.config.as_deref(), overrides, env_seed()) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(2);
            }
        };
    match run_experiment(&cfg) {
        Ok(outcome) => {
            for line in &outcome.summary_lines {
                println!("{line}");
            }
            println!(
                "wrote {} artifact(s) under {}",
                outcome.artifacts.len(),
                cfg.out_dir.display()
            );
            if outcome.diverged {
                eprintln!("at least one run diverged");
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn report(name: &str, pass: bool, detail: String) -> bool {
    println!("{}  {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn cmd_check(args: CheckArgs) -> ExitCode {
    let (warmup, samples) = if args.quick {
        (5_000usize, 50_000usize)
    } else {
        (20_000, 200_000)
    };
    let mut ok = true;

    // Analytic gradients against central differences.
    {
        let mut rng = RngStream::new(7);
        let quad = Quadratic::new(4);
        let theta = santa_opt::core::NoiseSource::gaussian_vector(&mut rng, 4);
        let err = grad_check(&quad, &theta, 1e-6).unwrap();
        ok &= report(
            "grad-check quadratic",
            err < 1e-9,
            format!("max rel err {err:.2e}"),
        );
        let dw = DoubleWell;
        let theta = ParamVector::from_vec(vec![0.7]).unwrap();
        let err = grad_check(&dw, &theta, 1e-6).unwrap();
        ok &= report(
            "grad-check double-well",
            err < 1e-7,
            format!("max rel err {err:.2e}"),
        );
    }

    // Double-well stationary points bracket correctly.
    {
        let roots = double_well_minima();
        let pass = (roots.global_min + 2.94).abs() < 0.01 && (roots.local_min - 2.22).abs() < 0.01;
        ok &= report(
            "double-well roots",
            pass,
            format!(
                "global {:.4}, local {:.4}",
                roots.global_min, roots.local_min
            ),
        );
    }

    // Sampler stationarity at beta = 1.
    for (name, spec) in [
        ("santa-sss", SamplerSpec::SantaSss { eta: 1e-4 }),
        ("sgld", SamplerSpec::Sgld { eta: 0.01 }),
        ("msgnht", SamplerSpec::Msgnht { eta: 0.01 }),
    ] {
        let mut rng = RngStream::new(11);
        let mut sampler = sampler_for(spec, 2, &mut rng).unwrap();
        match moment_test(sampler.as_mut(), warmup, samples, &mut rng) {
            Ok((rep, pass)) => {
                ok &= report(
                    &format!("stationarity {name}"),
                    pass,
                    format!(
                        "worst |mean| {:.4}, worst |var-1| {:.4}",
                        rep.worst_mean(),
                        rep.worst_variance_gap()
                    ),
                );
            }
            Err(e) => {
                ok = report(
                    &format!("stationarity {name}"),
                    false,
                    format!("diverged: {e}"),
                );
            }
        }
    }

    // Integrator weak-accuracy ordering at h = 0.2.
    {
        let euler = integrator_bias(Scheme::Euler, &[0.2], 4, warmup as u64, samples as u64, 3)
            .unwrap()[0]
            .bias;
        let sss = integrator_bias(Scheme::Sss, &[0.2], 4, warmup as u64, samples as u64, 3)
            .unwrap()[0]
            .bias;
        let pass = matches!((euler, sss), (Some(e), Some(s)) if s <= e);
        ok &= report(
            "integrator ordering",
            pass,
            format!("euler bias {euler:?}, sss bias {sss:?}"),
        );
    }

    // Basin escape: Santa reaches the global well, RMSprop stays local.
    {
        let cfg =
            santa_opt::harness::resolve_config(BTreeMap::new(), BTreeMap::new(), None).unwrap();
        let santa_cfg = cfg.santa_config(1).unwrap();
        let seeds = if args.quick { 10 } else { 25 };
        let rep = basin_escape(&BasinOptimizer::Santa(santa_cfg), 1, seeds, 4000, 0.15).unwrap();
        let pass = rep.global_fraction() >= 0.9;
        ok &= report(
            "basin escape santa",
            pass,
            format!(
                "{}/{} seeds at global well",
                rep.global_count, rep.seeds_run
            ),
        );
        let mut bl =
            BaselineConfig::new(BaselineKind::Rmsprop, StepSchedule::constant(5e-4).unwrap());
        bl.sigma = 0.99;
        let rep = basin_escape(&BasinOptimizer::Baseline(bl), 1, seeds, 4000, 0.15).unwrap();
        let pass = rep.local_fraction() >= 0.9;
        ok &= report(
            "basin trap rmsprop",
            pass,
            format!("{}/{} seeds at local well", rep.local_count, rep.seeds_run),
        );
    }

    if ok {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_plot_data(args: PlotDataArgs) -> ExitCode {
    match emit_plot_data(&args.traces, &args.column, &args.out) {
        Ok(path) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Check(args) => cmd_check(args),
        Command::PlotData(args) => cmd_plot_data(args),
    }
}
