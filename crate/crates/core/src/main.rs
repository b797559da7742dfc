use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ptrkg::cli::commands::{cmd_analyze, cmd_plan, cmd_report, cmd_translate};
use ptrkg::cli::{BackendKind, ConfigOverrides, PipelineConfig};

/// Translate a C project to Rust, guided by a pointer knowledge graph.
///
/// The HTTP backend reads its bearer credential from the environment variable named by
/// `backend.credential_env` in the configuration file.
#[derive(Parser)]
#[command(name = "ptrkg", version)]
struct Cli {
    /// Configuration file (defaults to ./ptrkg.toml when present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,
    /// Repair attempts per translation unit.
    #[arg(long, global = true)]
    max_repairs: Option<u32>,
    /// Overwrite a nonempty generated crate.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the knowledge graph of a C project directory.
    Analyze { project: PathBuf },
    /// Compute the translation order from a stored knowledge graph.
    Plan { kg: PathBuf },
    /// Translate unit by unit into a compiling Rust crate.
    Translate {
        kg: PathBuf,
        /// A stored plan; it is checked against the knowledge graph first.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Measure lints and unsafe usage of the generated crate.
    Report,
}

fn run(cli: Cli) -> ptrkg::Result<()> {
    let overrides = ConfigOverrides {
        output: cli.output,
        backend: cli.backend,
        max_repairs: cli.max_repairs,
        force: cli.force,
    };
    let cfg = PipelineConfig::load(cli.config.as_deref())?.apply(&overrides)?;
    match cli.command {
        Command::Analyze { project } => print!("{}", cmd_analyze(&project, &cfg)?.1),
        Command::Plan { kg } => {
            let (path, summary) = cmd_plan(&kg, &cfg)?;
            print!("{summary}");
            println!("plan written to {}", path.display());
        }
        Command::Translate { kg, plan } => {
            print!("{}", cmd_translate(&kg, plan.as_deref(), &cfg)?.summary())
        }
        Command::Report => print!("{}", cmd_report(&cfg)?.summary()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
