mod config;
mod csvout;
mod modes;

use clap::{Args, Parser, Subcommand};
use layerlab_core::{Error, Result};
use std::path::PathBuf;

/// Layered-control laboratory: gridworld missions, bi-criterion sweet-spot
/// sweeps, quantized-channel tradeoffs, and robustness-law reports.
#[derive(Parser)]
#[command(name = "layerlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed-loop gridworld mission and log the full trace.
    Simulate(RunArgs),
    /// Sweep bi-criterion frontiers, minimax certificates, and the LQR curve.
    Pareto(RunArgs),
    /// Tabulate delay/rate tradeoffs for the quantized control channel.
    Sensorimotor(RunArgs),
    /// Tabulate sensitivity magnitudes and check the conservation laws.
    Bode(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Directory the CSV tables are written into (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed stored in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    let (mode, args) = match &cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::Pareto(a) => ("pareto", a),
        Command::Sensorimotor(a) => ("sensorimotor", a),
        Command::Bode(a) => ("bode", a),
    };
    let mut cfg = config::load_config(&args.config)?;
    if cfg.mode != mode {
        return Err(Error::config(
            "mode",
            format!("config selects '{}' but the subcommand is '{mode}'", cfg.mode),
        ));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Error::Domain(format!("cannot create {}: {e}", args.out.display())))?;

    // validate() already proved the matching block is present.
    match mode {
        "simulate" => modes::run_simulate(cfg.simulate.as_ref().unwrap(), &args.out),
        "pareto" => modes::run_pareto(cfg.pareto.as_ref().unwrap(), cfg.seed, &args.out),
        "sensorimotor" => modes::run_sensorimotor(cfg.sensorimotor.as_ref().unwrap(), &args.out),
        "bode" => modes::run_bode(cfg.bode.as_ref().unwrap(), cfg.seed, &args.out),
        _ => unreachable!(),
    }
}
