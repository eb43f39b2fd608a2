//! Command-line driver: dataset statistics, training, both evaluation
//! protocols, and metric diagnostics, all with persisted artifacts and a
//! replayable manifest per run.

mod commands;
mod config;
mod dataset;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "transa", version, about = "Adaptive-metric translation embeddings for knowledge graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DatasetArgs {
    /// Dataset directory with train.txt, valid.txt (or dev.txt), test.txt.
    /// Falls back to $TRANSA_DATA_DIR.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Field order of the triple files.
    #[arg(long, default_value = "hrt", value_parser = ["hrt", "htr"])]
    column_order: String,
}

#[derive(Subcommand)]
enum Command {
    /// Print dataset statistics (entity/relation/split counts, ATPE).
    Stats {
        #[command(flatten)]
        data: DatasetArgs,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model and write checkpoints, a report and a manifest.
    Train(Box<commands::TrainArgs>),
    /// Link prediction: raw/filtered Mean Rank and HITS@10 plus the
    /// per-category breakdown.
    EvalLink {
        /// Model checkpoint.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DatasetArgs,
        /// Skip the raw setting in the stdout summary.
        #[arg(long)]
        filtered_only: bool,
        /// Worker threads; 0 means all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Output directory for the CSV tables and manifest; defaults to
        /// the checkpoint's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Triple classification: thresholds tuned on validation, accuracy on
    /// test.
    EvalClass {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Per-relation weight diagnostics from the LDL factorization.
    AnalyzeWeights {
        #[arg(long)]
        model: PathBuf,
        /// Optional dataset; when labeled, per-relation accuracies are
        /// included in the table.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value = "hrt", value_parser = ["hrt", "htr"])]
        column_order: String,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// 2-D PCA export of entity embeddings around one relation.
    ExportPca {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DatasetArgs,
        /// Relation name to export.
        #[arg(long)]
        relation: String,
        /// Tag entities as matched against this head's completions instead
        /// of the relation's full tail set.
        #[arg(long)]
        head: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats { data, out } => commands::stats(&data, out.as_deref()),
        Command::Train(args) => commands::train(*args),
        Command::EvalLink {
            model,
            data,
            filtered_only,
            workers,
            out_dir,
        } => commands::eval_link(&model, &data, filtered_only, workers, out_dir.as_deref()),
        Command::EvalClass {
            model,
            data,
            workers,
            out_dir,
        } => commands::eval_class(&model, &data, workers, out_dir.as_deref()),
        Command::AnalyzeWeights {
            model,
            dataset,
            column_order,
            workers,
            out_dir,
        } => commands::analyze_weights(
            &model,
            dataset.as_deref(),
            &column_order,
            workers,
            out_dir.as_deref(),
        ),
        Command::ExportPca {
            model,
            data,
            relation,
            head,
            out_dir,
        } => commands::export_pca(&model, &data, &relation, head.as_deref(), out_dir.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

impl DatasetArgs {
    fn column_order(&self) -> transa::data::ColumnOrder {
        transa::data::ColumnOrder::parse(&self.column_order).expect("validated by clap")
    }
}
