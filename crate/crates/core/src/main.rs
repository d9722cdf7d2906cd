use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ftnpl::cli::{run_experiment, Experiment, ExperimentConfig, Overrides};
use ftnpl::error::Error;

#[derive(Parser)]
#[command(name = "ftnpl", version, about = "Learning dynamics in two-player adversarial games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continuous matching pennies.
    Pennies(RunArgs),
    /// Matching pennies with a ReLU discriminator loss.
    #[command(name = "pennies_nonconvex", alias = "pennies-nonconvex")]
    PenniesNonconvex(RunArgs),
    /// Discrete matching pennies under multiplicative weights, plus its
    /// replicator flow.
    Replicator(RunArgs),
    /// One-dimensional GAN on Gaussian data.
    Toygan(RunArgs),
    /// Imitation of a circling expert.
    Circleworld(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    /// ftrl_l2, ftrl_entropy, ftpl or ftnpl.
    #[arg(long)]
    learner: Option<String>,
    /// Queue size.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    code_size: Option<usize>,
    /// relu_of_sum, sum_of_relus or squared.
    #[arg(long)]
    penalty: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(experiment: Experiment, args: RunArgs) -> Result<(), Error> {
    let file = args.config.as_ref().map(std::fs::read_to_string).transpose()?;
    let flags = Overrides {
        seed: args.seed,
        steps: args.steps,
        learner: args.learner,
        k: args.k,
        code_size: args.code_size,
        penalty: args.penalty,
        out: args.out,
    };
    let cfg = ExperimentConfig::load(experiment, file.as_deref(), &flags)?;
    let artifacts = run_experiment(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&artifacts)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Pennies(a) => (Experiment::Pennies, a),
        Command::PenniesNonconvex(a) => (Experiment::PenniesNonconvex, a),
        Command::Replicator(a) => (Experiment::Replicator, a),
        Command::Toygan(a) => (Experiment::Toygan, a),
        Command::Circleworld(a) => (Experiment::Circleworld, a),
    };
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Usage { .. } | Error::Config(_) => 2,
                Error::Unavailable(_) => 3,
                _ => 1,
            })
        }
    }
}
