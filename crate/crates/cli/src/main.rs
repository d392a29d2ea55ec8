use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use physprop_cli::dataset::{self, load_manifest, RunConfig, SplitSizes};
use physprop_cli::evaluate::{self, EvalOptions, Task};
use physprop_cli::report::{collect_reports, render_table, table_csv};
use physprop_cli::train::{train_gru, TrainOptions};
use physprop_cli::{worker_pool, FileAudit, Result};
use physprop_core::gru::{LossKind, TrainConfig, DEFAULT_HIDDEN};
use physprop_core::pipeline::{EstimatorKind, Timing};
use physprop_core::scene::PropertyKind;

#[derive(Parser)]
#[command(
    name = "physprop",
    version,
    about = "Physical property estimation benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train/test-1/test-2 splits and a manifest.
    Generate(GenerateArgs),
    /// Score an estimator on the test splits.
    Evaluate(EvaluateArgs),
    /// Train the GRU elasticity readout on the train split.
    TrainGru(TrainArgs),
    /// Tabulate report files.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, required_unless_present = "from_manifest")]
    property: Option<PropertyKind>,
    /// Record counts as `train,test-1,test-2`.
    #[arg(long, default_value = "200,100,100")]
    split_sizes: SplitSizes,
    /// Pixel noise standard deviation.
    #[arg(long, default_value_t = dataset::DEFAULT_NOISE_SIGMA)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Clips per shared-camera viewpoint group.
    #[arg(long, default_value_t = dataset::DEFAULT_GROUP_SIZE)]
    group_size: usize,
    /// Relative pairs drawn per test split at evaluation.
    #[arg(long, default_value_t = dataset::DEFAULT_RELATIVE_PAIRS)]
    pairs: usize,
    #[arg(long)]
    fps: Option<f64>,
    /// Clip length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Regenerate exactly the dataset described by this manifest.
    #[arg(long, conflicts_with_all = ["property", "seed", "noise_sigma", "split_sizes", "group_size", "pairs", "fps", "duration"])]
    from_manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset directory.
    #[arg(long)]
    data: PathBuf,
    /// Defaults to the oracle for the dataset's property.
    #[arg(long)]
    estimator: Option<EstimatorKind>,
    #[arg(long, default_value = "relative")]
    task: Task,
    /// Evenly subsample each clip to this many frames.
    #[arg(long)]
    frames: Option<usize>,
    /// GRU checkpoint, required by `--estimator gru`.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Override the manifest's relative pair count.
    #[arg(long)]
    pairs: Option<usize>,
    /// Correlate log predictions with log ground truth.
    #[arg(long)]
    log_pearson: bool,
    /// Report directory; defaults to `<data>/reports`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Checkpoint path; the training curve goes next to it as `.csv`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 128)]
    batch_size: usize,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = DEFAULT_HIDDEN)]
    hidden: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "l1")]
    loss: LossArg,
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum LossArg {
    L1,
    LogL1,
    Bce,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::L1 => LossKind::L1,
            LossArg::LogL1 => LossKind::LogL1,
            LossArg::Bce => LossKind::Bce,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Report directories.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Also write the table as CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn generate(args: GenerateArgs, audit: &FileAudit) -> Result<()> {
    let config = match &args.from_manifest {
        Some(path) => RunConfig::from_manifest(&load_manifest(path, audit)?, &args.out),
        None => {
            let property = args.property.expect("clap requires --property");
            let defaults = Timing::default_for(property);
            RunConfig {
                property,
                sizes: args.split_sizes,
                noise_sigma: args.noise_sigma,
                seed: args.seed,
                group_size: args.group_size,
                relative_pairs: args.pairs,
                timing: Timing {
                    fps: args.fps.unwrap_or(defaults.fps),
                    duration: args.duration.unwrap_or(defaults.duration),
                },
                out: args.out.clone(),
            }
        }
    };
    let manifest = dataset::generate(&config, audit)?;
    for s in &manifest.splits {
        println!(
            "{}: {} records -> {}",
            s.split,
            s.records,
            config.out.join(&s.file).display()
        );
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs, audit: &FileAudit) -> Result<()> {
    let options = EvalOptions {
        estimator: args.estimator,
        task: args.task,
        frames: args.frames,
        checkpoint: args.checkpoint,
        relative_pairs: args.pairs,
        log_pearson: args.log_pearson,
        out: args.out,
    };
    for f in evaluate::evaluate(&args.data, &options, audit)? {
        println!(
            "{} {} {} {}: {:?} = {:.4} (n = {}, fallbacks = {}, failures = {})",
            f.report.property,
            f.estimator.as_str(),
            f.task.as_str(),
            f.report.split,
            f.report.metric,
            f.report.value,
            f.report.sample_count,
            f.fallbacks,
            f.failures.len()
        );
    }
    Ok(())
}

fn train(args: TrainArgs, audit: &FileAudit) -> Result<()> {
    let options = TrainOptions {
        config: TrainConfig {
            learning_rate: args.lr,
            batch_size: args.batch_size,
            epochs: args.epochs,
            seed: args.seed,
            loss: args.loss.into(),
            hidden: args.hidden,
        },
        checkpoint: args.out,
        curve: None,
        frames: args.frames,
    };
    let summary = train_gru(&args.data, &options, audit)?;
    println!(
        "trained on {} clips ({} skipped), {} steps, final loss {:.5}; curve -> {}",
        summary.examples,
        summary.skipped,
        summary.steps,
        summary.final_loss,
        summary.curve.display()
    );
    Ok(())
}

fn report(args: ReportArgs, audit: &FileAudit) -> Result<()> {
    let reports = collect_reports(&args.reports, audit)?;
    print!("{}", render_table(&reports));
    if let Some(out) = &args.out {
        audit.write_atomic(out, table_csv(&reports).as_bytes())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let pool = worker_pool()?;
    let audit = FileAudit::new();
    pool.install(|| match cli.command {
        Command::Generate(a) => generate(a, &audit),
        Command::Evaluate(a) => evaluate(a, &audit),
        Command::TrainGru(a) => train(a, &audit),
        Command::Report(a) => report(a, &audit),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
