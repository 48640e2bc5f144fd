//! `pipeline` command: runs the stages end to end or one at a time.

pub mod artifacts;
pub mod config;
pub mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{demo_config_path, PipelineConfig, OUT_DIR_ENV};
pub use stages::{run_all, run_stage, Context, Stage, StageError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_STAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "pipeline", about = "Per-article judgment outcome model selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every stage in order.
    Run(RunArgs),
    /// Write the corpus (synthetic or ingested) to the output directory.
    Synth(StageArgs),
    /// Segment judgments and keep the standard ones.
    Parse(StageArgs),
    /// Balanced training and ratio-matched test sets per article.
    Split(StageArgs),
    /// Train corpus word and paragraph embeddings.
    Embed(StageArgs),
    /// Dense feature matrices for embedding feature types.
    Features(StageArgs),
    /// Cross-validated grid search per article.
    Search(SearchArgs),
    /// Refit the best configuration and score the test set.
    Eval(StageArgs),
    /// Per-article and weighted report.
    Report(StageArgs),
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Output directory; beats PIPELINE_OUT_DIR and the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct StageArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub stage: StageArgs,
    /// Print the configurations that would be evaluated and exit.
    #[arg(long)]
    pub dry_run: bool,
}

fn context(config: &PathBuf, o: &Overrides, dry_run: bool) -> Result<Context, String> {
    let mut cfg = PipelineConfig::load(config)?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(w) = o.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    let out = match (&o.out, std::env::var_os(OUT_DIR_ENV)) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => cfg.out_dir.clone(),
    };
    Ok(Context { cfg, out, dry_run })
}

pub fn main_with(cli: Cli) -> ExitCode {
    let (stage, config, overrides, dry_run) = match &cli.command {
        Command::Run(a) => (None, &a.config, &a.overrides, false),
        Command::Synth(a) => (Some(Stage::Synth), &a.config, &a.overrides, false),
        Command::Parse(a) => (Some(Stage::Parse), &a.config, &a.overrides, false),
        Command::Split(a) => (Some(Stage::Split), &a.config, &a.overrides, false),
        Command::Embed(a) => (Some(Stage::Embed), &a.config, &a.overrides, false),
        Command::Features(a) => (Some(Stage::Features), &a.config, &a.overrides, false),
        Command::Search(a) => (Some(Stage::Search), &a.stage.config, &a.stage.overrides, a.dry_run),
        Command::Eval(a) => (Some(Stage::Eval), &a.config, &a.overrides, false),
        Command::Report(a) => (Some(Stage::Report), &a.config, &a.overrides, false),
    };
    let ctx = match context(config, overrides, dry_run) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let result = match stage {
        Some(s) => run_stage(s, &ctx).map_err(|e| (s, e)),
        None => run_all(&ctx),
    };
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err((s, e)) => {
            eprintln!("stage {s} failed: {e}");
            ExitCode::from(EXIT_STAGE)
        }
    }
}
