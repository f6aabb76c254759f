mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thermostat::explainers::ExplainError;
use thermostat::hub::HubError;

#[derive(Parser, Debug)]
#[command(name = "thermostat", version, about = "Generate, inspect and compare explanation datasets")]
pub struct Cli {
    /// Dataset store root
    #[arg(long, env = "THERMO_ROOT", default_value = "thermostat_data", global = true)]
    pub root: PathBuf,
    /// Global seed for stochastic explainers, corpus generation and training
    #[arg(long, default_value_t = 42, global = true)]
    pub seed: u64,
    /// Extra progress output on stderr
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Explain every text of a corpus and store the result as a dataset
    Generate(GenerateArgs),
    /// Write one instance as an HTML heatmap
    Render(RenderArgs),
    /// Kendall's tau between the attributions of two datasets
    Correlate(CorrelateArgs),
    /// List instances where two datasets' models predict different labels
    Compare(CompareArgs),
    /// Check a stored dataset against the schema
    Validate(IdArgs),
    /// One-line summary of a dataset's configuration
    Info(IdArgs),
    /// Write a synthetic labeled sentiment corpus as JSON Lines
    ToyCorpus(ToyCorpusArgs),
    /// Train a reference classifier on a JSON Lines corpus
    Train(TrainArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ExplainerName {
    Lgxa,
    Lig,
    Lime,
    Occ,
    Svs,
}

impl ExplainerName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lgxa => "lgxa",
            Self::Lig => "lig",
            Self::Lime => "lime",
            Self::Occ => "occ",
            Self::Svs => "svs",
        }
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// JSON Lines corpus of {"text": ..., "label": ...}
    #[arg(long)]
    pub corpus: PathBuf,
    /// Reference model JSON
    #[arg(long)]
    pub model: PathBuf,
    /// Defaults to the explainer coordinate of --id
    #[arg(long, value_enum)]
    pub explainer: Option<ExplainerName>,
    /// Hyperparameters as a JSON object, inline or a path to a JSON file
    #[arg(long)]
    pub config: Option<String>,
    /// dataset-model-explainer[@version]
    #[arg(long)]
    pub id: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: u16,
    /// Comma-separated class names
    #[arg(long, value_delimiter = ',')]
    pub labels: Vec<String>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub idx: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Model whose vocabulary decodes the token ids; defaults to the one
    /// recorded in the dataset config
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub id_a: String,
    #[arg(long)]
    pub id_b: String,
    /// Leave out positions holding the padding token
    #[arg(long)]
    pub drop_pad: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub id_a: String,
    #[arg(long)]
    pub id_b: String,
    /// Write an HTML page and a JSON record for every disagreement
    #[arg(long)]
    pub render_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IdArgs {
    #[arg(long)]
    pub id: String,
}

#[derive(Args, Debug)]
pub struct ToyCorpusArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub size: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ActivationName {
    Tanh,
    Identity,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ActivationName::Tanh)]
    pub activation: ActivationName,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
}

/// Failures that point at a bug or numerical breakdown rather than at the
/// user's input.
fn is_internal(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        let explain = cause.downcast_ref::<ExplainError>().or_else(|| {
            match cause.downcast_ref::<HubError>() {
                Some(HubError::Generate { source, .. }) | Some(HubError::Explainer(source)) => {
                    Some(source)
                }
                _ => None,
            }
        });
        matches!(
            explain,
            Some(ExplainError::SingularSystem | ExplainError::NonFinite(_))
        )
    })
}

/// The error chain joined with ": ", skipping causes whose text the
/// previous message already ends with.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match std::panic::catch_unwind(|| commands::run(&cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(err)) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(if is_internal(&err) { 2 } else { 1 })
        }
        Err(_) => ExitCode::from(2),
    }
}
