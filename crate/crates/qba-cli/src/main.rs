use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qba_cli::{run, LogBase, Mode, RunManifest, Task};

/// Channel capacity solvers built on alternating optimization: monotone
/// lower bounds with certified a-posteriori termination.
#[derive(Debug, Parser)]
#[command(name = "qba", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Holevo quantity of a cq channel (classical capacity).
    Holevo(CommonArgs),
    /// Thermodynamic capacity of a quantum channel.
    Thermo(CommonArgs),
    /// Coherent information (quantum capacity of less noisy channels).
    Coherent(CommonArgs),
    /// Channel mutual information (entanglement-assisted capacity).
    Mutual(CommonArgs),
    /// Minimal entropy gain, via the trivial-reference thermo solve.
    EntropyGain(CommonArgs),
    /// Completely bounded minimal conditional entropy.
    CbMin(CommonArgs),
    /// Classical capacity of a stochastic matrix (vector iteration only).
    Classical(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Channel file (JSON with a kraus, cq, or stochastic section).
    channel: PathBuf,

    /// Additive error target in nats.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,

    /// Iteration budget; defaults to the a-priori bound, capped at 1e7.
    #[arg(long)]
    max_iters: Option<u64>,

    /// standard | adaptive | fixed-gamma=<value>
    #[arg(long, default_value = "standard")]
    mode: String,

    /// Capacity display unit: nats | bits.
    #[arg(long, default_value = "nats")]
    log_base: String,

    /// Write a per-iteration CSV trace to this path.
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Seed for randomized diagnostics (less-noisy sampling).
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Gibbs reference operators file (thermo only; defaults to identity).
    #[arg(long)]
    gibbs: Option<PathBuf>,
}

fn manifest(task: Task, args: CommonArgs) -> anyhow::Result<RunManifest> {
    Ok(RunManifest {
        task,
        channel_path: args.channel,
        epsilon: args.epsilon,
        max_iters: args.max_iters,
        mode: Mode::parse(&args.mode)?,
        log_base: LogBase::parse(&args.log_base)?,
        trace_path: args.trace,
        seed: args.seed,
        gibbs_path: args.gibbs,
    })
}

fn main() -> ExitCode {
    // Usage problems are input errors (exit 1); help and version exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let built = match cli.command {
        Command::Holevo(args) => manifest(Task::Holevo, args),
        Command::Thermo(args) => manifest(Task::Thermo, args),
        Command::Coherent(args) => manifest(Task::Coherent, args),
        Command::Mutual(args) => manifest(Task::Mutual, args),
        Command::EntropyGain(args) => manifest(Task::EntropyGain, args),
        Command::CbMin(args) => manifest(Task::CbMin, args),
        Command::Classical(args) => manifest(Task::Classical, args),
    };
    let manifest = match built {
        Ok(m) => m,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(1);
        }
    };
    match run(&manifest) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
