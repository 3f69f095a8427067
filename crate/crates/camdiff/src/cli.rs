//! The `camdiff` command line.
//!
//! Exit status: 0 on success, 2 when a synthesis run finished but skipped
//! images because a backend was unavailable or misbehaved, 1 on any fatal
//! error (bad arguments, missing dataset, unwritable output, ...).

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use camdiff_core::backend::mock::{MockDiscriminator, MockGenerator};
use camdiff_core::metrics::inception_score;
use camdiff_core::{Error as CoreError, SkipReason};
use clap::{Args, Parser, Subcommand};

use crate::config::{describe_keys, AppConfig};
use crate::dataset::{self, DatasetLayout, PipelineSettings, RunStats};
use crate::evaluate;
use crate::http::HttpBackend;
use crate::inspect;
use crate::labels;
use crate::PipelineError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_BACKEND_SKIPS: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "camdiff",
    version,
    about = "Synthesize and evaluate salient-object datasets built from camouflage datasets"
)]
#[command(after_help = describe_keys())]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Insert a salient object into every image of a dataset.
    Synthesize(SynthesizeArgs),
    /// Score prediction maps against ground-truth masks.
    Evaluate(EvaluateArgs),
    /// Show the mask placement chosen for one image.
    Inspect(InspectArgs),
    /// Summarize a synthesis manifest.
    Stats(StatsArgs),
    /// Inception Score of stored classifier outputs (one JSON array per line).
    Inception(InceptionArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Global seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> anyhow::Result<AppConfig> {
        let mut cfg = match &self.config {
            Some(path) => AppConfig::load(path)?,
            None => AppConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.orchestrator.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Input dataset root containing Imgs/ and GT/.
    #[arg(long)]
    pub root: PathBuf,
    /// Output dataset root.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Use the in-process mock generator and discriminator.
    #[arg(long)]
    pub mock: bool,
    /// Constant score of the mock discriminator.
    #[arg(long)]
    pub mock_score: Option<f64>,
    /// Model service base url.
    #[arg(long, env = "CAMDIFF_BACKEND_URL")]
    pub backend_url: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub max_attempts: Option<u32>,
    #[arg(long)]
    pub accept_threshold: Option<f64>,
    /// Prompt label list, one per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Manifest path; `<out>/manifest.jsonl` by default.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of predicted saliency maps (`<stem>.png`).
    #[arg(long)]
    pub pred_dir: PathBuf,
    /// Directory of ground-truth masks (`<stem>.png`).
    #[arg(long)]
    pub gt_dir: PathBuf,
    /// Dataset label used in the report and table header.
    #[arg(long, default_value = "dataset")]
    pub label: String,
    /// Also write a metric-per-row CSV table here.
    #[arg(long)]
    pub table_out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Write the canvas with grid, bbox and mask outlined to this PNG.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Args)]
pub struct InceptionArgs {
    /// JSON-lines file of class-probability vectors.
    #[arg(long)]
    pub probs: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub splits: usize,
}

pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Synthesize(args) => synthesize(args),
        Command::Evaluate(args) => evaluate_cmd(args),
        Command::Inspect(args) => inspect_cmd(args),
        Command::Stats(args) => stats_cmd(args),
        Command::Inception(args) => inception_cmd(args),
    }
}

fn synthesize(args: SynthesizeArgs) -> anyhow::Result<i32> {
    let mut cfg = args.common.load()?;
    if let Some(url) = args.backend_url {
        cfg.backend.url = Some(url);
    }
    if args.mock {
        cfg.backend.mock = true;
    }
    if let Some(score) = args.mock_score {
        cfg.backend.mock_score = score;
    }
    if let Some(n) = args.workers {
        cfg.runtime.workers = Some(n);
    }
    if let Some(n) = args.max_attempts {
        cfg.orchestrator.max_attempts = n;
    }
    if let Some(t) = args.accept_threshold {
        cfg.orchestrator.accept_threshold = t;
    }
    if let Some(path) = args.labels {
        cfg.paths.labels = Some(path);
    }
    if let Some(out) = args.out {
        cfg.paths.output = Some(out);
    }
    cfg.validate()?;

    let Some(output) = cfg.paths.output.clone() else {
        bail!("no output directory: pass --out or set paths.output");
    };
    let labels = match &cfg.paths.labels {
        Some(path) => labels::load_labels(path)?,
        None => labels::default_labels(),
    };
    let workers = cfg.workers();
    let layout = DatasetLayout::new(&args.root);
    let settings = PipelineSettings {
        config: cfg.clone(),
        labels,
        output,
        manifest: args.manifest,
    };

    let report = if cfg.backend.mock {
        let generator = MockGenerator::default();
        let discriminator = MockDiscriminator::constant(cfg.backend.mock_score);
        dataset::run_pipeline(&layout, &generator, &discriminator, &settings, workers)?
    } else {
        let Some(url) = cfg.backend.url.as_deref() else {
            bail!("no backend: pass --backend-url, set CAMDIFF_BACKEND_URL or backend.url, or use --mock");
        };
        let backend = HttpBackend::new(cfg.http_config(url)?)?;
        match backend.health() {
            Ok(h) => log::info!(
                "backend ok: generator {}, discriminator {}",
                h.generator,
                h.discriminator
            ),
            Err(e) => log::warn!("backend health check failed: {e}"),
        }
        dataset::run_pipeline(&layout, &backend, &backend, &settings, workers)?
    };

    for path in &report.unpaired {
        log::warn!("no ground truth for {}", path.display());
    }
    println!("{}", report.stats.summary());
    println!("manifest {}", report.manifest.display());
    Ok(if report.stats.backend_failures() > 0 {
        EXIT_BACKEND_SKIPS
    } else {
        EXIT_OK
    })
}

fn evaluate_cmd(args: EvaluateArgs) -> anyhow::Result<i32> {
    let workers = args
        .workers
        .unwrap_or_else(|| AppConfig::default().workers());
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    let eval = evaluate::evaluate_dirs(&args.pred_dir, &args.gt_dir, workers)?;
    for path in &eval.unpaired {
        log::warn!("no ground truth for prediction {}", path.display());
    }
    if eval.report.f_excluded > 0 {
        log::warn!(
            "{} images with empty ground truth left out of f_max",
            eval.report.f_excluded
        );
    }
    println!("{}", evaluate::format_report(&args.label, &eval.report));
    if let Some(path) = args.table_out {
        fs::write(&path, evaluate::format_table(&args.label, &eval.report))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(EXIT_OK)
}

fn inspect_cmd(args: InspectArgs) -> anyhow::Result<i32> {
    let cfg = args.common.load()?;
    let found = match inspect::inspect(&args.image, &args.gt, &cfg) {
        Ok(found) => found,
        Err(PipelineError::Core(e @ (CoreError::NoForeground | CoreError::NoEligibleRegion))) => {
            bail!("{}: {e}", SkipReason::from_error(&e))
        }
        Err(e) => return Err(e.into()),
    };
    println!("{}", found.describe());
    if let Some(path) = args.overlay {
        found.write_overlay(&path)?;
    }
    Ok(EXIT_OK)
}

fn format_stats(stats: &RunStats) -> String {
    let mut out = format!(
        "{}\nacceptance {:.1}%\n",
        stats.summary(),
        stats.acceptance_rate * 100.0
    );
    if !stats.attempts_histogram.is_empty() {
        out.push_str("attempts:\n");
        for (attempts, n) in &stats.attempts_histogram {
            out.push_str(&format!("  {attempts:>3} {n}\n"));
        }
    }
    out
}

fn stats_cmd(args: StatsArgs) -> anyhow::Result<i32> {
    let stats = dataset::stats(&args.manifest)?;
    print!("{}", format_stats(&stats));
    Ok(EXIT_OK)
}

fn inception_cmd(args: InceptionArgs) -> anyhow::Result<i32> {
    let probs = evaluate::read_prob_vectors(&args.probs)?;
    let score = inception_score(&probs, args.splits)?;
    println!(
        "inception_score {score:.4} images {} splits {}",
        probs.len(),
        args.splits
    );
    Ok(EXIT_OK)
}
