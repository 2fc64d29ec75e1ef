use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kagome_vqe_cli::commands;
use kagome_vqe_cli::config::ExperimentConfig;

/// Experiment workbench for the antiferromagnetic Heisenberg model on
/// kagome fragments: exact diagonalization, VQE optimization, error
/// mitigation, metric certification, and spin-structure maps.
#[derive(Parser)]
#[command(name = "kagome-vqe", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config file's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact spectrum, ground-subspace correlations, and exact S(q).
    Ed(CommonArgs),
    /// Run the configured optimizer and write the convergence trace.
    Vqe(CommonArgs),
    /// Raw, REM, and ZNE energy estimates at fixed parameters.
    Mitigate(CommonArgs),
    /// Certify the Fubini-Study metric at random parameter draws.
    Metric(CommonArgs),
    /// Static spin structure factor map over the Brillouin-zone grid.
    StructureFactor(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, fn(&ExperimentConfig) -> Result<(), kagome_vqe_cli::CliError>) =
        match &cli.command {
            Command::Ed(a) => (a, commands::cmd_ed),
            Command::Vqe(a) => (a, commands::cmd_vqe),
            Command::Mitigate(a) => (a, commands::cmd_mitigate),
            Command::Metric(a) => (a, commands::cmd_metric),
            Command::StructureFactor(a) => (a, commands::cmd_structure_factor),
        };
    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
