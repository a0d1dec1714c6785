//! `morphoforge`: design modular serial robots from the command line.
//!
//! Every command talks to a morphoforge service. Without `--server` a private
//! service is started on an ephemeral loopback port for the duration of the
//! command.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "morphoforge", version, about = "Multi-objective design of modular serial robots")]
struct Cli {
    /// Base URL of a running service; omitted = start an embedded one.
    #[arg(long, global = true, env = "MORPHOFORGE_SERVER")]
    server: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run NSGA-II on a scenario and write the archive, Pareto set and URDFs.
    Optimize(OptimizeArgs),
    /// Evaluate one design against a scenario.
    Evaluate(EvaluateArgs),
    /// Write the URDF of one design.
    ExportUrdf(ExportUrdfArgs),
    /// List the builtin scenarios.
    Scenarios,
    /// Run the HTTP service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: std::net::SocketAddr,
    },
}

#[derive(Args, Clone, Default)]
pub struct IkArgs {
    /// IK restarts per target.
    #[arg(long)]
    pub ik_restarts: Option<usize>,
    /// IK damping λ (> 0).
    #[arg(long)]
    pub ik_lambda: Option<f64>,
    /// IK iterations per restart.
    #[arg(long)]
    pub ik_iters: Option<usize>,
    /// IK residual tolerance.
    #[arg(long)]
    pub ik_tol: Option<f64>,
}

#[derive(Args)]
pub struct OptimizeArgs {
    /// Builtin scenario name or path to a scenario TOML file.
    #[arg(long)]
    pub scenario: String,
    /// Total objective evaluations.
    #[arg(long, default_value_t = 10_000)]
    pub evaluations: usize,
    /// Population size (even).
    #[arg(long, default_value_t = 100)]
    pub population: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluation threads; does not affect results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, env = "MORPHOFORGE_OUT", default_value = "morphoforge-out")]
    pub out: PathBuf,
    /// Also write a gnuplot script `plot.gp`.
    #[arg(long)]
    pub plot: bool,
    /// Do not stream progress records to stderr.
    #[arg(long)]
    pub quiet: bool,
    #[command(flatten)]
    pub ik: IkArgs,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Design string, e.g. `Y:0.3,P:0.25,S:0.2,F:0.01,F:0.01,F:0.01`.
    #[arg(long)]
    pub design: String,
    /// Builtin scenario name or path to a scenario TOML file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the full result as JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub ik: IkArgs,
}

#[derive(Args)]
pub struct ExportUrdfArgs {
    #[arg(long)]
    pub design: String,
    /// Output file; defaults to `robot.urdf` in `$MORPHOFORGE_OUT` or the working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Robot name in the URDF.
    #[arg(long, default_value = "robot")]
    pub name: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::from(commands::EXIT_INTERNAL);
        }
    };
    match runtime.block_on(commands::dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
