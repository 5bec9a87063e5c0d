mod plot;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sbpg_core::verify::CheckName;

#[derive(Parser)]
#[command(name = "sbpg", version, about = "Train, verify and plot state-based potential game learners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
pub struct ConfigArgs {
    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `section.key=value` override, applied in order after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Simulated seconds per episode.
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run training episodes and the evaluation episode.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// sbpg, ds2, stack, or all (one subdirectory per variant).
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the potential-game conditions and gradient laws; exit 0 iff all pass.
    Verify {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Run only these checks (repeatable).
        #[arg(long = "check")]
        checks: Vec<CheckName>,
        /// Directory for report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render SVG charts from one or more training output directories.
    Plot {
        /// Training output directories, or a parent holding one per variant.
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random search over the config's sweep space.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        variant: Option<String>,
        /// Defaults to sweep.trials from the config.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train { cfg, variant, out } => run::train(&cfg, variant.as_deref(), &out),
        Command::Verify { cfg, checks, out } => run::verify(&cfg, &checks, out.as_deref()),
        Command::Plot { metrics, out } => plot::plot(&metrics, &out).map(|_| true),
        Command::Sweep { cfg, variant, trials, out } => run::sweep(&cfg, variant.as_deref(), trials, out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
