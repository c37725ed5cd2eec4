//! `slvw`: batch driver for structured-light photoionization studies.

mod plot;
mod studies;

use clap::{Args, Parser, Subcommand};
use slvw_core::config::{self, Experiment, ExperimentConfig, Study};
use slvw_core::io::RunManifest;
use slvw_core::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "slvw", version, about = "Electron dynamics in structured laser fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a plotting script next to the CSVs.
    #[arg(long)]
    plot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Divergence and gradient audit of the configured beams.
    FieldsAudit(RunArgs),
    /// Photoelectron ⟨L_z⟩ versus atom distance from the beam axis.
    OamTransfer(RunArgs),
    /// Spot-averaged orbital dichroism.
    Dichroism(RunArgs),
    /// Sideband yields and angular centroids in a radially polarized beam.
    RvbSpectra(RunArgs),
    /// Center-of-energy streaking traces.
    Streak(RunArgs),
    /// Reconstruct the radial dressing field from streaking traces.
    Reconstruct {
        #[command(flatten)]
        run: RunArgs,
        /// Use traces from a previous `streak` run instead of computing them.
        #[arg(long)]
        scans: Option<PathBuf>,
    },
    /// Check a config and list every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print an example config for a study.
    Template { study: String },
}

enum Failure {
    Invalid(Vec<String>),
    Numeric(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) => Failure::Io(e.to_string()),
            Error::NonConvergence { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Invalid(vec![e.to_string()]),
        }
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| Failure::Invalid(vec![e.to_string()]))
}

fn resolve(cfg: &ExperimentConfig) -> Result<Experiment, Failure> {
    Experiment::resolve(cfg).map_err(|d| Failure::Invalid(d.iter().map(|d| d.to_string()).collect()))
}

fn run(study: Study, args: &RunArgs, scans: Option<&Path>) -> Result<(), Failure> {
    let cfg = load(&args.config)?;
    let mut exp = resolve(&cfg)?;
    if exp.study != study {
        return Err(Failure::Invalid(vec![format!(
            "study: config declares `{}` but the command is `{}`",
            exp.study.name(),
            study.name()
        )]));
    }
    if let Some(o) = &args.output {
        exp.output_dir = o.clone();
    }
    exp.plot_script |= args.plot;
    let config_json = serde_json::to_value(&exp).map_err(|e| Failure::Io(e.to_string()))?;
    let mut manifest = RunManifest::new(study.name(), config_json);
    let outcome = studies::run(&exp, scans)?;
    let dir = exp.output_dir.clone();
    for (name, bytes) in &outcome.files {
        manifest.emit(&dir, name, bytes)?;
    }
    if exp.plot_script {
        if let Some(script) = plot::script(study) {
            manifest.emit(&dir, "plot.py", script.as_bytes())?;
        }
    }
    manifest.gates = outcome.gates;
    manifest.warnings = outcome.warnings;
    let json = manifest.to_json()?;
    std::fs::write(dir.join("manifest.json"), json + "\n").map_err(Error::from)?;
    print!("{}", outcome.summary);
    let failed: Vec<_> = manifest.gates.iter().filter(|g| !g.passed).collect();
    if !failed.is_empty() {
        let msg = failed
            .iter()
            .map(|g| format!("{} = {:.3e} exceeds {:.3e}", g.name, g.value, g.tolerance))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Failure::Numeric(format!("convergence gates failed: {msg}")));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::FieldsAudit(a) => run(Study::FieldsAudit, &a, None),
        Command::OamTransfer(a) => run(Study::OamTransfer, &a, None),
        Command::Dichroism(a) => run(Study::Dichroism, &a, None),
        Command::RvbSpectra(a) => run(Study::RvbSpectra, &a, None),
        Command::Streak(a) => run(Study::Streak, &a, None),
        Command::Reconstruct { run: a, scans } => run(Study::Reconstruct, &a, scans.as_deref()),
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let diags = config::validate(&cfg);
            if diags.is_empty() {
                println!("ok");
                Ok(())
            } else {
                Err(Failure::Invalid(diags.iter().map(|d| d.to_string()).collect()))
            }
        }
        Command::Template { study } => match Study::parse(&study) {
            Some(s) => {
                print!("{}", config::template(s));
                Ok(())
            }
            None => Err(Failure::Invalid(vec![format!("unknown study {study:?}")])),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(diags)) => {
            for d in diags {
                eprintln!("error: {d}");
            }
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_IO)
        }
    }
}
