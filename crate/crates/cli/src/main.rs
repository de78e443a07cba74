mod advise;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Budget-aware sequential experiment selection for scaling-law fitting.
#[derive(Parser)]
#[command(name = "lawdesign", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance file from a recipe (or the shipped suite).
    Generate {
        /// Recipe JSON path; omit with --suite to emit the shipped instances.
        #[arg(long)]
        recipe: Option<PathBuf>,
        /// Output instance path (single recipe) or directory (--suite).
        #[arg(long)]
        out: PathBuf,
        /// Emit the twelve shipped synthetic instances into --out.
        #[arg(long, default_value_t = false)]
        suite: bool,
    },
    /// Run a sweep of episodes (instances x policies x seeds) and emit a report.
    Run {
        /// Run configuration JSON path.
        #[arg(long)]
        config: PathBuf,
    },
    /// Advise the next experiment for a live session file.
    Advise {
        /// Session JSON path.
        #[arg(long)]
        session: PathBuf,
    },
    /// Record an observed outcome for a candidate into a session file.
    Record {
        #[arg(long)]
        session: PathBuf,
        /// Candidate index being recorded.
        #[arg(long)]
        candidate: usize,
        /// Observed outcome value.
        #[arg(long)]
        outcome: f64,
    },
    /// Re-aggregate existing episode logs into report files.
    Report {
        /// Log files or directories containing .jsonl logs.
        #[arg(long, required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        /// Output directory for report.tsv and curves.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate { recipe, out, suite } => run::cmd_generate(recipe, out, suite),
        Command::Run { config } => run::cmd_run(&config),
        Command::Advise { session } => advise::cmd_advise(&session),
        Command::Record { session, candidate, outcome } => {
            advise::cmd_record(&session, candidate, outcome)
        }
        Command::Report { logs, out } => run::cmd_report(&logs, &out),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
