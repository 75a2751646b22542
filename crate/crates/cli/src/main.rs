//! `entropic run <experiment>`: builds a system or Markov model, evaluates an
//! experiment over its grids and writes CSV data, `manifest.json` and
//! `residuals.json` into the output directory.
//!
//! Exit codes: 0 all checks passed, 1 numerical or I/O failure, 2 invalid
//! configuration, 3 some identity check failed.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{load_structured, Experiment, ExperimentConfig, GridSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Numeric(#[from] entropic::Error),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "entropic", version, about = "Entropic fluctuation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment.
    Run(RunArgs),
    /// List built-in system presets and Markov models.
    Presets,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    /// TOML or JSON experiment file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// System definition file (TOML or JSON).
    #[arg(long)]
    system: Option<PathBuf>,
    /// Markov model file or built-in name.
    #[arg(long)]
    model: Option<String>,
    /// Grid as start:stop:count or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, value_enum)]
    alpha_axis: Option<config::Axis>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long = "T", allow_hyphen_values = true)]
    big_t: Option<String>,
    /// Rate-function grid.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sandwich_alpha: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Tolerance override KEY=VAL, repeatable.
    #[arg(long = "tolerance")]
    tolerances: Vec<String>,
    /// Also write wall-clock timings to timing.json.
    #[arg(long)]
    timing: bool,
}

fn merge(args: RunArgs) -> Result<(ExperimentConfig, bool), CliError> {
    let mut cfg: ExperimentConfig = match &args.config {
        Some(p) => load_structured(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(e) = cfg.experiment {
        if e != args.experiment {
            return Err(CliError::Config {
                path: "experiment".into(),
                message: format!(
                    "config file names `{}` but `{}` was requested",
                    e.name(),
                    args.experiment.name()
                ),
            });
        }
    }
    cfg.experiment = Some(args.experiment);
    let grid = |text: &Option<String>, key: &str, slot: &mut Option<GridSpec>| -> Result<(), CliError> {
        if let Some(t) = text {
            let axis = slot.as_ref().and_then(|g| g.axis);
            let mut g = GridSpec::parse(t, key)?;
            g.axis = axis;
            *slot = Some(g);
        }
        Ok(())
    };
    grid(&args.alpha, "alpha", &mut cfg.alpha)?;
    grid(&args.t, "t", &mut cfg.t)?;
    grid(&args.big_t, "T", &mut cfg.big_t)?;
    grid(&args.s, "s", &mut cfg.s)?;
    grid(&args.sandwich_alpha, "sandwich-alpha", &mut cfg.sandwich_alpha)?;
    if let Some(axis) = args.alpha_axis {
        cfg.alpha.get_or_insert_with(GridSpec::default).axis = Some(axis);
    }
    if args.preset.is_some() {
        cfg.preset = args.preset;
    }
    if args.system.is_some() {
        cfg.system = args.system;
    }
    if args.model.is_some() {
        cfg.model = args.model;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    for kv in &args.tolerances {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Config {
            path: "tolerance".into(),
            message: format!("expected KEY=VAL, got `{kv}`"),
        })?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::Config {
            path: format!("tolerances.{k}"),
            message: format!("`{v}` is not a number"),
        })?;
        cfg.tolerances.insert(k.trim().to_string(), v);
    }
    Ok((cfg, args.timing))
}

fn run(args: RunArgs) -> Result<bool, CliError> {
    let started = Instant::now();
    let (cfg, timing) = merge(args)?;
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(CliError::Config {
                path: "threads".into(),
                message: "must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("entropic-out"));
    let passed = experiments::run(&cfg, &out)?;
    if timing {
        let t = serde_json::json!({ "wall_seconds": started.elapsed().as_secs_f64() });
        let path = out.join("timing.json");
        std::fs::write(&path, output::to_json(&t)?).map_err(|e| CliError::Io { path, source: e })?;
    }
    log::info!("finished in {:.2} s", started.elapsed().as_secs_f64());
    Ok(passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            for p in entropic::qsystem::PRESETS {
                println!("system  {p}");
            }
            for m in experiments::MODELS {
                println!("model   {m}");
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => match run(args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => {
                eprintln!("some identity checks failed; see residuals.json");
                ExitCode::from(3)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
    }
}
