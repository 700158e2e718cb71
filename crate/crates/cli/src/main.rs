use std::path::PathBuf;
use std::process::ExitCode;

use chemanchor::activation::Mode;
use chemanchor::datagen::Mix;
use clap::{Args, Parser, Subcommand};

mod commands;
mod manifest;

#[derive(Parser, Debug)]
#[command(name = "chemanchor", version, about = "Batch tools for functional-group aware molecule handling")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "chemanchor-out")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split molecules into functional groups and write one hybrid document each.
    Decompose {
        /// SMILES (.smi, one per line), MOL or SDF files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Priority list replacing the shipped one, one group name per line.
        #[arg(long)]
        priority_list: Option<PathBuf>,
    },
    /// Rebuild molecules from hybrid documents.
    Reconstruct {
        /// Hybrid documents, or directories of them (*.json).
        inputs: Vec<PathBuf>,
        /// Priority list the documents were decomposed with.
        #[arg(long)]
        priority_list: Option<PathBuf>,
    },
    /// Score predicted SMILES against ground truth line by line.
    Eval {
        /// Predicted SMILES, one per line.
        pred: PathBuf,
        /// Ground-truth SMILES, aligned with the predictions.
        gt: PathBuf,
    },
    /// Write a synthetic annotated dataset.
    Generate {
        /// Reaction and molecule lines.
        source: PathBuf,
        /// Reaction-layout samples.
        #[arg(long, default_value_t = 0)]
        count: usize,
        /// Single-molecule samples.
        #[arg(long, default_value_t = 0)]
        molecules: usize,
        /// Linear, multi-line and tree weights.
        #[arg(long, default_value = "0.7,0.15,0.15")]
        mix: Mix,
    },
    /// Resolve SMILES to names and build prompts.
    Resolve {
        /// SMILES or reaction lines.
        input: PathBuf,
        /// offline reads only the cache and fixtures; live also queries PubChem.
        #[arg(long, default_value = "offline")]
        mode: Mode,
        /// Directory for cached service answers.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Text appended to each prompt.
        #[arg(long, default_value = "Analyze...")]
        task: String,
    },
}

/// Outcome of a finished batch.
pub struct Outcome {
    pub failures: usize,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.common.jobs).build()?;
    let common = cli.common;
    pool.install(|| match cli.command {
        Command::Decompose { inputs, priority_list } => commands::decompose::run(&common, &inputs, priority_list.as_deref()),
        Command::Reconstruct { inputs, priority_list } => {
            commands::reconstruct::run(&common, &inputs, priority_list.as_deref())
        }
        Command::Eval { pred, gt } => commands::eval::run(&common, &pred, &gt),
        Command::Generate {
            source,
            count,
            molecules,
            mix,
        } => commands::generate::run(&common, &source, count, molecules, mix),
        Command::Resolve {
            input,
            mode,
            cache_dir,
            task,
        } => commands::resolve::run(&common, &input, mode, cache_dir, &task),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) if outcome.failures == 0 => ExitCode::SUCCESS,
        Ok(outcome) => {
            eprintln!("{} item(s) failed", outcome.failures);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
