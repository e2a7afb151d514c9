use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use molcomp::harness::{execute, ExperimentConfig, Mode};

#[derive(Parser)]
#[command(version, about = "Molecular-channel arithmetic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML). Defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Use the particle simulator instead of sampled Poisson counts.
    #[arg(long, global = true)]
    particle: bool,
    /// Trials per point.
    #[arg(long, global = true)]
    trials: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Particle simulation against the channel impulse response.
    Cir,
    /// Error rate against SNR.
    Er,
    /// Error rate against SNR with the union bound in both variance forms.
    Bound,
    /// Arithmetic round trips.
    Arith,
}

fn run(cli: &Cli) -> molcomp::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    cfg.particle |= cli.particle;
    cfg.validate()?;
    let mode = match cli.command {
        Command::Cir => Mode::CirValidation,
        Command::Er => Mode::ErVsSnr,
        Command::Bound => Mode::BoundVsSim,
        Command::Arith => Mode::ArithmeticDemo,
    };
    for path in execute(mode, &cfg, &cli.out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
