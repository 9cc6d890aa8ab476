use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use qpareto_cli::config::ConfigLayer;
use qpareto_cli::loaders::dataset_info;
use qpareto_cli::outputs::write_space_csv;
use qpareto_cli::run::execute_run;
use qpareto_core::genome::SPACE_SIZE;

/// Multi-objective architecture search for hybrid quantum-classical
/// classifiers: evolves circuit designs against accuracy, quantum FLOPs,
/// and parameter count.
#[derive(Parser)]
#[command(name = "qpareto", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run an evolutionary search on a dataset and write its outputs.
    Run(RunArgs),
    /// Write the cost table of the entire design space for one dataset
    /// shape, no training involved.
    Enumerate(EnumerateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; any flag below overrides its value.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset name: iris, wine, breast_cancer, digits, or mnist.
    #[arg(long)]
    dataset: Option<String>,
    /// Directory with the data files and checksum manifest [default: data].
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Output directory, created if missing [default: out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed for the whole run [default: 42].
    #[arg(long)]
    seed: Option<u64>,
    /// Population size [default: 20].
    #[arg(long)]
    pop_size: Option<usize>,
    /// Generation budget after the initial population [default: 8].
    #[arg(long)]
    generations: Option<usize>,
    /// Crossover probability [default: 0.8].
    #[arg(long)]
    pc: Option<f64>,
    /// Per-gene mutation probability [default: 0.2].
    #[arg(long)]
    pm: Option<f64>,
    /// Generations of an unchanged front before stopping [default: 2].
    #[arg(long)]
    stagnation: Option<usize>,
    /// Training epochs per candidate [default: 5].
    #[arg(long)]
    epochs: Option<usize>,
    /// Training batch size [default: 64].
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam learning rate [default: 0.003].
    #[arg(long)]
    lr: Option<f64>,
    /// Ranked individuals reported besides the front [default: 5].
    #[arg(long)]
    top_k: Option<usize>,
    /// Evaluation worker threads [default: available cores].
    #[arg(long)]
    parallelism: Option<usize>,
}

impl RunArgs {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            dataset: self.dataset.clone(),
            data_dir: self.data_dir.clone(),
            out: self.out.clone(),
            seed: self.seed,
            pop_size: self.pop_size,
            generations: self.generations,
            pc: self.pc,
            pm: self.pm,
            stagnation: self.stagnation,
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            top_k: self.top_k,
            parallelism: self.parallelism,
        }
    }
}

#[derive(Args)]
struct EnumerateArgs {
    /// Dataset whose feature and class counts shape the cost table.
    #[arg(long)]
    dataset: String,
    /// Path of the CSV to write.
    #[arg(long, default_value = "space.csv")]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let file = match &args.config {
                Some(path) => ConfigLayer::from_file(path)?,
                None => ConfigLayer::default(),
            };
            let cfg = args.layer().or(file).resolve()?;
            execute_run(&cfg)?;
        }
        Command::Enumerate(args) => {
            let info = dataset_info(&args.dataset)?;
            write_space_csv(&args.out, info.n_features, info.n_classes)?;
            println!(
                "wrote {} architectures for {} ({} features, {} classes) to {}",
                SPACE_SIZE,
                info.name,
                info.n_features,
                info.n_classes,
                args.out.display()
            );
        }
    }
    Ok(())
}
