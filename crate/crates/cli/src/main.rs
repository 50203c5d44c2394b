use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swdiv_cli::figures::{self, FIGURES};
use swdiv_cli::{parse_scenario, run_scenario, CliError, RunOptions, RunSummary};

#[derive(Parser)]
#[command(name = "swdiv", version, about = "Level crossing rate and fade duration of switched-diversity combiners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        opts: RunArgs,
    },
    /// Bundled figure scenarios.
    Figures {
        #[command(subcommand)]
        command: FiguresCommand,
    },
}

#[derive(Subcommand)]
enum FiguresCommand {
    /// List the bundled figures.
    List,
    /// Run every scenario of one figure.
    Run {
        id: String,
        #[command(flatten)]
        opts: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Analytic curves only.
    #[arg(long)]
    no_sim: bool,
    /// Base seed for the simulator.
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per simulated path, overriding the scenario.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            no_sim: self.no_sim,
            seed: self.seed,
            n_samples: self.samples,
            out_dir: self.out.clone(),
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Parse { .. } | CliError::Validation(_) | CliError::UnknownFigure(_) => 2,
                _ => 1,
            })
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { file, opts } => {
            let text = std::fs::read_to_string(&file).map_err(|e| CliError::Io {
                path: file.display().to_string(),
                source: e,
            })?;
            let s = parse_scenario(&text)?;
            print_summary(&run_scenario(&s, &opts.options())?);
        }
        Command::Figures { command: FiguresCommand::List } => {
            for f in FIGURES {
                println!("{}", f.listing());
            }
        }
        Command::Figures {
            command: FiguresCommand::Run { id, opts },
        } => {
            let fig = figures::find(&id)?;
            for s in fig.scenarios()? {
                print_summary(&run_scenario(&s, &opts.options())?);
            }
        }
    }
    Ok(())
}

fn print_summary(r: &RunSummary) {
    println!("{}: {} curve(s), report {}", r.scenario, r.curves.len(), r.report.display());
    for c in &r.curves {
        let flags = c.fallbacks.len() + c.insufficient.len();
        let suffix = if flags > 0 { format!(" ({flags} item(s) in report)") } else { String::new() };
        println!("  {}{}", c.csv.display(), suffix);
    }
}
