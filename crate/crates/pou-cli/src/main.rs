use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pou_cli::{config, experiments, CliError, ExperimentKind};

/// Simulation and verification toolkit for piecewise Ornstein-Uhlenbeck
/// processes driven by alpha-stable noise.
#[derive(Parser)]
#[command(name = "pou", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configuration's worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the configuration's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Structural checks: M-matrix, drift assumptions, stability
    /// certificate, and schedule admissibility.
    CheckModel(RunArgs),
    /// Sinkhorn distance curve between the chain's law and a long reference
    /// run, averaged over repeats.
    W1Curve(RunArgs),
    /// Deterministic sweep of the characteristic-function optimality ratio.
    OuOptimality(RunArgs),
    /// Normality diagnostics of normalised time-average statistics.
    Clt(RunArgs),
    /// Transport-solver oracle-agreement and property suite.
    SinkhornSelftest(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::CheckModel(a)
            | Command::W1Curve(a)
            | Command::OuOptimality(a)
            | Command::Clt(a)
            | Command::SinkhornSelftest(a) => a,
        }
    }

    fn kind(&self) -> ExperimentKind {
        match self {
            Command::CheckModel(_) => ExperimentKind::CheckModel,
            Command::W1Curve(_) => ExperimentKind::W1Curve,
            Command::OuOptimality(_) => ExperimentKind::OuOptimality,
            Command::Clt(_) => ExperimentKind::CltCheck,
            Command::SinkhornSelftest(_) => ExperimentKind::SinkhornSelftest,
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let args = cli.command.args();
    let mut cfg = config::load_config(&args.config)?;
    if cfg.experiment != cli.command.kind() {
        return Err(CliError::Config(format!(
            "experiment: configuration declares `{}` but the subcommand expects `{}`",
            cfg.experiment.name(),
            cli.command.kind().name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    let outcome = experiments::run(&cfg)?;
    println!(
        "{}: {} ({})",
        cfg.experiment.name(),
        if outcome.passed { "pass" } else { "FAIL" },
        outcome.summary
    );
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
