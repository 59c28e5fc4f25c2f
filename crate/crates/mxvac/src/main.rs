use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mxvac::commands;
use mxvac::{CliError, Format, Scenario};
use mxvac_core::report::Provenance;

/// Analytics, CTMC oracle and simulation for M^X/G/1 queues with general vacation modes.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conditional working-mode law from the decomposition.
    Analyze(Common),
    /// Stationary law of the truncated Markov chain.
    Oracle(Common),
    /// Regenerative simulation.
    Simulate(Common),
    /// Compare stored working-mode tables.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Sources to compare, e.g. `analytic,oracle`.
        #[arg(long, value_delimiter = ',', default_value = "analytic,oracle")]
        sources: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, env = "MXVAC_OUT_DIR", default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jmax: Option<usize>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Common {
    fn scenario(&self) -> Result<Scenario, CliError> {
        let mut s = Scenario::load(&self.scenario)?;
        let run = &mut s.run;
        if let Some(v) = self.seed {
            run.seed = v;
        }
        if let Some(v) = self.jmax {
            run.j_max = v;
        }
        if let Some(v) = self.cycles {
            run.n_cycles = v;
        }
        if let Some(v) = self.replications {
            run.replications = v;
        }
        if let Some(v) = self.truncation {
            run.truncation = v;
        }
        Ok(s)
    }
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    match cli.command {
        Command::Analyze(c) => commands::analyze(&c.scenario()?, &c.out, c.format),
        Command::Oracle(c) => commands::oracle(&c.scenario()?, &c.out, c.format),
        Command::Simulate(c) => commands::simulate(&c.scenario()?, &c.out, c.format),
        Command::Compare { common, sources } => {
            let sources = sources
                .iter()
                .map(|s| {
                    Provenance::parse(s)
                        .ok_or_else(|| CliError::Scenario(format!("unknown source `{s}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            commands::compare(&common.scenario()?, &common.out, &sources, common.format)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            // A closed pipe downstream is not an error of ours.
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
