//! `sotneuron`: run neuron, sweep and network experiments from a TOML config.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration, 3 input/output,
//! 4 simulation divergence.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sotneuron::crossbar::InferenceMode;

use config::ExperimentConfig;
use error::CliError;

pub const CONFIG_ENV: &str = "SOTNEURON_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "sotneuron", version, about = "SOT neuron and crossbar network simulator")]
struct Cli {
    /// TOML experiment config; every key is optional.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-step switching runs with trajectories.
    Switch {
        #[arg(long)]
        repeats: Option<u32>,
    },
    /// Monte Carlo switching probability over a clock × write grid.
    PhaseDiagram {
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Offline training of the float network.
    Train,
    /// Map trained weights to crossbar conductances.
    Quantize,
    /// Classify one evaluation image.
    Infer {
        #[arg(long)]
        image: Option<usize>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<InferenceMode>,
    },
    /// Accuracy over the evaluation set.
    Evaluate {
        #[arg(long, value_parser = parse_mode)]
        mode: Option<InferenceMode>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        images: Option<usize>,
    },
    /// Clock power and crossbar static power.
    Power {
        #[arg(long)]
        image: Option<usize>,
    },
}

fn parse_mode(s: &str) -> Result<InferenceMode, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown mode {s}; use deterministic, stochastic_lookup or stochastic_full"))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Switch { .. } => "switch",
            Command::PhaseDiagram { .. } => "phase-diagram",
            Command::Train => "train",
            Command::Quantize => "quantize",
            Command::Infer { .. } => "infer",
            Command::Evaluate { .. } => "evaluate",
            Command::Power { .. } => "power",
        }
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        match *self {
            Command::Switch { repeats } => set(&mut cfg.switch.repeats, repeats),
            Command::PhaseDiagram { trials } => set(&mut cfg.sweep.trials_per_point, trials),
            Command::Infer { image, mode } => {
                set(&mut cfg.network.image, image);
                set(&mut cfg.network.mode, mode);
            }
            Command::Evaluate { mode, runs, images } => {
                set(&mut cfg.network.mode, mode);
                set(&mut cfg.network.runs_per_image, runs);
                if images.is_some() {
                    cfg.network.images = images;
                }
            }
            Command::Power { image } => set(&mut cfg.network.image, image),
            Command::Train | Command::Quantize => {}
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.threads, cli.threads);
    set(&mut cfg.out, cli.out.clone());
    cli.command.apply(&mut cfg);
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|cfg| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
        commands::run(&cfg, cli.command.name())
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
