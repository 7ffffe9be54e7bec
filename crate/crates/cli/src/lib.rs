//! Command-line experiments for the modegate simulator.
//!
//! Every command resolves an [`ExperimentConfig`], runs the pipeline and
//! writes schema-versioned JSON (and CSV for scans and tables).

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modegate::logical::BellInput;

use config::{delay_grid, ExperimentConfig, Overrides};
use output::{csv_text, Envelope, Sink};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<modegate::Error> for CliError {
    fn from(e: modegate::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "modegate", version, about = "Two-photon transverse-mode CNOT gate experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON experiment configuration (default: $MODEGATE_CONFIG, else built-in defaults)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base RNG seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Coincidences per tomography setting; photon pairs per delay for hom
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    /// Use expected counts; no sampling or Monte Carlo errors
    #[arg(long, global = true)]
    pub exact: bool,
    /// Monte Carlo resamples for error bars
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory (default: print to stdout)
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Delay scan of TE1/TE1 coincidences and Gaussian dip fit
    Hom {
        /// Half-width of the delay grid (default: 4 coherence widths)
        #[arg(long)]
        span: Option<f64>,
        /// Number of delays in the grid
        #[arg(long)]
        points: Option<usize>,
    },
    /// State tomography of the Bell states produced from |±⟩|0/1⟩
    Bell {
        #[arg(long = "input", value_parser = parse_input, allow_hyphen_values = true)]
        inputs: Vec<BellInput>,
    },
    /// CHSH parameter of the generated Bell states
    Chsh {
        #[arg(long = "input", value_parser = parse_input, allow_hyphen_values = true)]
        inputs: Vec<BellInput>,
    },
    /// Process tomography from 16 inputs × 16 projections
    Qpt,
    /// Conditional outcome probabilities of the computational inputs
    TruthTable,
}

fn parse_input(s: &str) -> Result<BellInput, String> {
    BellInput::parse(s).ok_or_else(|| format!("expected one of +0, -0, +1, -1, got {s:?}"))
}

fn inputs_or_all(inputs: &[BellInput]) -> Vec<BellInput> {
    if inputs.is_empty() {
        BellInput::ALL.to_vec()
    } else {
        inputs.to_vec()
    }
}

/// Builds the resolved configuration for `cli`.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut base = ExperimentConfig::discover(cli.common.config.as_deref())?;
    if let Command::Hom { span, points } = &cli.command {
        if span.is_some() || points.is_some() {
            let span = span.unwrap_or(4.0 * base.noise.coherence_width);
            let points = points.unwrap_or(41);
            if !(span > 0.0 && span.is_finite()) || points < 5 {
                return Err(CliError::Config("delay grid needs span > 0 and at least 5 points".into()));
            }
            base.delays = Some(delay_grid(span, points));
        }
    }
    base.resolve(&Overrides {
        seed: cli.common.seed,
        shots: cli.common.shots,
        trials: cli.common.trials,
        exact: cli.common.exact,
        output: cli.common.output.clone(),
    })
}

/// Runs one command and writes its artifacts.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = resolve_config(cli)?;
    let sink = Sink::from_config(&config);
    match &cli.command {
        Command::Hom { .. } => {
            let report = experiments::hom(&config)?;
            let csv = csv_text(&experiments::hom::CSV_HEADER, &report.csv_rows())?;
            sink.emit("hom_scan.csv", &csv, false)?;
            sink.emit("hom_fit.json", &Envelope::new("hom", &config, &report).to_json()?, true)?;
        }
        Command::Bell { inputs } => {
            let report = experiments::bell(&config, &inputs_or_all(inputs))?;
            sink.emit("bell.json", &Envelope::new("bell", &config, &report).to_json()?, true)?;
        }
        Command::Chsh { inputs } => {
            let report = experiments::chsh(&config, &inputs_or_all(inputs))?;
            sink.emit("chsh.json", &Envelope::new("chsh", &config, &report).to_json()?, true)?;
        }
        Command::Qpt => {
            let report = experiments::qpt(&config)?;
            sink.emit("qpt.json", &Envelope::new("qpt", &config, &report).to_json()?, true)?;
        }
        Command::TruthTable => {
            let report = experiments::truth_table(&config)?;
            let csv = csv_text(&experiments::truth_table::CSV_HEADER, &report.csv_rows())?;
            sink.emit("truth_table.csv", &csv, true)?;
            sink.emit("truth_table.json", &Envelope::new("truth-table", &config, &report).to_json()?, false)?;
        }
    }
    Ok(())
}

/// Parses arguments, runs, and maps failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("modegate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
