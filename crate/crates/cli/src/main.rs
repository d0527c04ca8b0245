//! `factkit`: harmonize factuality corpora, compute expected inferences and
//! analyze model predictions.
//!
//! Exit codes: 0 success, 1 success with warnings, 2 usage or precondition
//! failure.

mod analyze;
mod config;
mod pipeline;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "factkit", version, about = "Event-factuality corpus harmonization and error analysis")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, env = "FACTKIT_CONFIG")]
    config: Option<PathBuf>,

    /// Run batch work on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a native corpus file into unified JSON Lines.
    Ingest(pipeline::IngestArgs),
    /// Assign train/dev/test splits.
    Split(pipeline::SplitArgs),
    /// Predict factuality from verb signatures.
    SigPredict(pipeline::SigPredictArgs),
    /// Compute expected inferences for evaluation items.
    Oracle(pipeline::OracleArgs),
    /// MAE and Pearson r per dataset.
    Eval(pipeline::EvalArgs),
    /// Error analyses over predictions.
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
}

/// Unified items plus one or more prediction files.
#[derive(Debug, Args)]
pub struct ItemsAndPreds {
    /// Unified JSON Lines item files.
    #[arg(long = "in", required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Prediction files (`id<TAB>score`); several are averaged per item.
    #[arg(long, required = true, num_args = 1..)]
    pub preds: Vec<PathBuf>,
    /// Restrict to one dataset.
    #[arg(long)]
    pub dataset: Option<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Split(_) => "split",
            Command::SigPredict(_) => "sig-predict",
            Command::Oracle(_) => "oracle",
            Command::Eval(_) => "eval",
            Command::Analyze(a) => a.name(),
        }
    }

    fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Ingest(a) => a.out.as_ref(),
            Command::Split(a) => a.out.as_ref(),
            Command::SigPredict(a) => a.out.as_ref(),
            Command::Oracle(a) => a.out.as_ref(),
            Command::Eval(a) => a.out.as_ref(),
            Command::Analyze(a) => a.out(),
        }
    }
}

pub struct Context {
    pub config: RunConfig,
    pub exec: factkit::Execution,
}

impl Context {
    /// Relative output paths land under the configured output directory.
    pub fn resolve_out(&self, p: &std::path::Path) -> PathBuf {
        match &self.config.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn thresholds(&self) -> Result<factkit::Thresholds> {
        Ok(match self.config.thresholds {
            Some(t) => factkit::Thresholds::new(t.lo, t.hi)?,
            None => factkit::Thresholds::default(),
        })
    }
}

fn dispatch(ctx: &Context, command: &Command) -> Result<Vec<String>> {
    let run = match command {
        Command::Ingest(a) => pipeline::ingest(ctx, a)?,
        Command::Split(a) => pipeline::split(ctx, a)?,
        Command::SigPredict(a) => pipeline::sig_predict(ctx, a)?,
        Command::Oracle(a) => pipeline::oracle(ctx, a)?,
        Command::Eval(a) => pipeline::eval(ctx, a)?,
        Command::Analyze(a) => analyze::run(ctx, a)?,
    };
    run.commit()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.config.as_deref().map(RunConfig::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let ctx = Context {
        config,
        exec: if cli.sequential {
            factkit::Execution::Sequential
        } else {
            factkit::Execution::default()
        },
    };
    match dispatch(&ctx, &cli.command) {
        Ok(warnings) if warnings.is_empty() => ExitCode::SUCCESS,
        Ok(warnings) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {}", run::render_error(&e));
            if let Some(out) = cli.command.out() {
                run::mark_failed(&ctx.resolve_out(out), cli.command.name(), &e);
            }
            ExitCode::from(2)
        }
    }
}
