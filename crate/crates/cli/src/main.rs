//! `agora`: run market sessions from scenario files and compare them with
//! the centralized solvers.
//!
//! Exit status is 0 when the session converged, 1 when it did not and 2 for
//! configuration errors.

/// `println!` that ignores a closed stdout (for example when piped into
/// `head`).
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

mod compare;
mod session;

use std::path::PathBuf;
use std::process::ExitCode;

use agora::market::Scheduler;
use agora::scenario::ModelChoice;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "agora", version, about = "Auction-driven equilibrium sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session and write its report and trace.
    Run(RunArgs),
    /// Run sessions and set them beside the system and user equilibria.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Number of consecutive seeds to sweep, starting at --seed.
        #[arg(long, env = "AGORA_SEEDS", default_value_t = 1)]
        seeds: u64,
    },
}

#[derive(Args, Clone)]
pub struct RunArgs {
    /// Scenario file.
    pub input: PathBuf,
    /// basic, carriers, arbitrageurs or exchange.
    #[arg(long, env = "AGORA_MODEL")]
    pub model: Option<ModelChoice>,
    #[arg(long, env = "AGORA_SEED")]
    pub seed: Option<u64>,
    /// Largest excess demand a cleared market may carry.
    #[arg(long, env = "AGORA_TOLERANCE")]
    pub tolerance: Option<f64>,
    #[arg(long, env = "AGORA_MAX_CYCLES")]
    pub max_cycles: Option<u32>,
    /// randomized or synchronous.
    #[arg(long, env = "AGORA_SCHEDULER")]
    pub scheduler: Option<Scheduler>,
    /// Where to write the JSON report.
    #[arg(long, env = "AGORA_REPORT")]
    pub report: Option<PathBuf>,
    /// Where to write the per-event CSV trace.
    #[arg(long, env = "AGORA_TRACE")]
    pub trace: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => session::run_command(args),
        Command::Compare { run, seeds } => compare::compare_command(run, *seeds),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
