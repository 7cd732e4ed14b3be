use clap::{Parser, Subcommand};
use kobacore_cli::{init_threads, report, run, validate, CliError};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kobacore", version, about = "Run kobacore experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Run a config and write the CSV and its manifest.
    Run {
        config: PathBuf,
        /// Override the CSV path from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Merge results and classify scans.
    Report {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Write the joined result rows here.
        #[arg(long)]
        merged: Option<PathBuf>,
    },
}

fn write_out(path: &PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Validate { config } => {
            validate(&config)?;
            println!("ok");
        }
        Command::Run { config, output } => {
            let (csv, manifest) = run(&config, output.as_deref())?;
            println!("{}\n{}", csv.display(), manifest.display());
        }
        Command::Report { manifests, summary, merged } => {
            let out = report(&manifests, merged.is_some())?;
            if out.mixed_seeds {
                eprintln!("warning: inputs were produced with different seeds");
            }
            if let (Some(p), Some(bytes)) = (merged, &out.merged) {
                write_out(&p, bytes)?;
            }
            match summary {
                Some(p) => write_out(&p, &out.summary)?,
                None => std::io::stdout().write_all(&out.summary).map_err(|e| CliError::Io(e.to_string()))?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
