use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bisimlab::engine::Strategy;
use bisimlab::Lts;
use bisimlab_cli::commands::{self, CliError, FamilyName, Outcome, RunOptions};
use bisimlab_cli::ltsp;
use clap::{Parser, Subcommand, ValueEnum};

/// Partition refinement laboratory: generate adversarial systems, run
/// costed and checked refinement, Roberts' algorithm, parallel rounds.
#[derive(Parser)]
#[command(name = "bisimlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a family member as an LTSP file.
    Gen {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Output file (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refine to stability, verify the trace and report its cost.
    Run {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::SingleSplitter)]
        strategy: StrategyArg,
        /// Start from the end-structure partition.
        #[arg(long, value_enum, default_value_t = OracleArg::None)]
        oracle: OracleArg,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Per-step costs as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also compute the exact minimum cost by exhaustive search
        /// (state bound from BISIMLAB_MAX_BRUTE, default 10).
        #[arg(long)]
        brute: bool,
    },
    /// Roberts' algorithm on a one-action system.
    Roberts {
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// One character per initial block, used to print words.
        #[arg(long)]
        symbols: Option<String>,
    },
    /// Round-based parallel refinement.
    Parallel {
        input: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Bisplitter,
    Layered,
    Seqsplit,
    Fanin,
    RobertsExample,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    SingleSplitter,
    FullSignature,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleArg {
    None,
    Es,
}

fn read_lts(path: &Path) -> Result<Lts, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    ltsp::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(CliError::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(outcome: &Outcome, report: Option<&Path>) -> Result<bool, CliError> {
    emit(report, &commands::render(&outcome.report))?;
    if !outcome.ok {
        let reason = outcome.report["failure"]
            .as_str()
            .unwrap_or("a bound check failed");
        eprintln!("error: verification failed: {reason}");
    }
    Ok(outcome.ok)
}

fn execute(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Gen { family, k, n, out } => {
            let family = match family {
                FamilyArg::Bisplitter => FamilyName::Bisplitter,
                FamilyArg::Layered => FamilyName::Layered,
                FamilyArg::Seqsplit => FamilyName::Seqsplit,
                FamilyArg::Fanin => FamilyName::Fanin,
                FamilyArg::RobertsExample => FamilyName::RobertsExample,
            };
            let lts = commands::gen(family, k, n)?;
            emit(out.as_deref(), &ltsp::serialize(&lts))?;
            Ok(true)
        }
        Command::Run {
            input,
            strategy,
            oracle,
            report,
            csv,
            brute,
        } => {
            let lts = read_lts(&input)?;
            let options = RunOptions {
                strategy: match strategy {
                    StrategyArg::SingleSplitter => Strategy::SingleSplitter,
                    StrategyArg::FullSignature => Strategy::FullSignature,
                },
                oracle: oracle == OracleArg::Es,
                brute: if brute {
                    Some(commands::brute_bound()?)
                } else {
                    None
                },
            };
            let output = commands::run(&lts, options)?;
            if let Some(path) = csv {
                std::fs::write(path, commands::steps_csv(&output.trace)?)?;
            }
            finish(&output.outcome, report.as_deref())
        }
        Command::Roberts {
            input,
            report,
            symbols,
        } => {
            let lts = read_lts(&input)?;
            let value = commands::roberts(&lts, symbols.as_deref())?;
            emit(report.as_deref(), &commands::render(&value))?;
            Ok(true)
        }
        Command::Parallel { input, report } => {
            let lts = read_lts(&input)?;
            finish(&commands::parallel(&lts), report.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
