//! Command-line front end: dataset generation, end-to-end runs, parameter
//! sweeps and kernel selfchecks.
//!
//! Exit codes: 0 ok, 2 config error, 3 I/O error, 4 selfcheck failure.

use clap::{Args, Parser, Subcommand};
use momentsnet::config::ExperimentConfig;
use momentsnet::experiment::{cmd_generate, cmd_run, cmd_selfcheck, cmd_sweep, CliError};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "momentsnet",
    about = "Learning-free moment-kernel feature networks for binary shape recognition",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic rotated-shape dataset (class dirs + manifest.csv).
    Generate(CommonArgs),
    /// Train and evaluate one configuration; writes results.csv, timings.csv, model.bin.
    Run(CommonArgs),
    /// Evaluate a cross-product of parameter values; writes sweep.csv.
    Sweep(CommonArgs),
    /// Run the kernel property suites and report each with its max deviation.
    Selfcheck,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value config file; every key can be overridden by the
    /// same-named flag below.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Kernel family: geometric, legendre, zernike, tchebichef, krawtchouk,
    /// dualhahn, pcet, pct, pst, gpcet, gpct, gpst, or pca.
    #[arg(long)]
    family: Option<String>,

    /// Network depth: 1 or 2 stages.
    #[arg(long)]
    stages: Option<u8>,

    /// First-stage filter count L1.
    #[arg(long)]
    l1: Option<usize>,

    /// Second-stage filter count L2 (defaults to L1).
    #[arg(long)]
    l2: Option<usize>,

    /// Patch side k (k1 = k2 = k).
    #[arg(long)]
    k: Option<usize>,

    /// Histogram block side h (h1 = h2 = h).
    #[arg(long)]
    h: Option<usize>,

    /// Block overlap ratio R in [0,1).
    #[arg(long)]
    overlap: Option<f64>,

    /// Binarization threshold t.
    #[arg(long)]
    threshold: Option<f64>,

    /// Pick t automatically so the ones-fraction lands in [0.4, 0.5].
    #[arg(long)]
    auto_threshold: bool,

    /// Classifier regularization trade-off C.
    #[arg(long)]
    c: Option<f64>,

    /// Classifier training epochs.
    #[arg(long)]
    epochs: Option<usize>,

    /// Seed for generation, splitting and training.
    #[arg(long)]
    seed: Option<u64>,

    /// Parallel worker bound (also capped by MOMENTSNET_THREADS).
    #[arg(long)]
    jobs: Option<usize>,

    /// Dataset directory holding manifest.csv; omitted = synthetic data.
    #[arg(long)]
    dataset: Option<PathBuf>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Training fraction of the stratified split.
    #[arg(long)]
    train_fraction: Option<f64>,

    /// Synthetic generator: number of shape classes (max 9).
    #[arg(long)]
    classes: Option<usize>,

    /// Synthetic generator: rotations per class (must divide 360).
    #[arg(long)]
    rotations: Option<usize>,

    /// Synthetic generator: jittered replicas per rotation.
    #[arg(long)]
    replicas: Option<usize>,

    /// Image side length after rescaling.
    #[arg(long)]
    size: Option<usize>,

    /// Also write feature containers (MNFV + CSV) next to the results.
    #[arg(long)]
    dump_features: bool,

    /// Sweep axis as param=v1,v2,... (repeatable, max 3 axes; params:
    /// threshold, l1, l2, k, h, overlap, c).
    #[arg(long = "sweep")]
    sweep: Vec<String>,
}

fn build_config(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_file(&text).map_err(CliError::from)?;
    }
    {
        let mut set = |key: &str, value: Option<String>| -> Result<(), CliError> {
            if let Some(v) = value {
                cfg.apply_kv(key, &v)?;
            }
            Ok(())
        };
        set("family", args.family.clone())?;
        set("stages", args.stages.map(|v| v.to_string()))?;
        set("l1", args.l1.map(|v| v.to_string()))?;
        set("l2", args.l2.map(|v| v.to_string()))?;
        set("k", args.k.map(|v| v.to_string()))?;
        set("h", args.h.map(|v| v.to_string()))?;
        set("overlap", args.overlap.map(|v| v.to_string()))?;
        set("threshold", args.threshold.map(|v| v.to_string()))?;
        set("c", args.c.map(|v| v.to_string()))?;
        set("epochs", args.epochs.map(|v| v.to_string()))?;
        set("seed", args.seed.map(|v| v.to_string()))?;
        set("jobs", args.jobs.map(|v| v.to_string()))?;
        set(
            "dataset",
            args.dataset.as_ref().map(|v| v.display().to_string()),
        )?;
        set("out", args.out.as_ref().map(|v| v.display().to_string()))?;
        set(
            "train-fraction",
            args.train_fraction.map(|v| v.to_string()),
        )?;
        set("classes", args.classes.map(|v| v.to_string()))?;
        set("rotations", args.rotations.map(|v| v.to_string()))?;
        set("replicas", args.replicas.map(|v| v.to_string()))?;
        set("size", args.size.map(|v| v.to_string()))?;
    }
    if args.auto_threshold {
        cfg.apply_kv("auto-threshold", "true")?;
    }
    if args.dump_features {
        cfg.apply_kv("dump-features", "true")?;
    }
    for axis in &args.sweep {
        let (param, values) = axis.split_once('=').ok_or_else(|| {
            CliError::Config(format!("sweep axis '{axis}' must look like param=v1,v2"))
        })?;
        cfg.add_sweep_axis(param.trim(), values.trim())?;
    }
    cfg.resolve_convention();
    cfg.validate_sources()?;
    Ok(cfg)
}

/// Builds the global worker pool from --jobs and MOMENTSNET_THREADS.
fn init_threads(jobs: usize) {
    let env_cap = std::env::var("MOMENTSNET_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0);
    let requested = if jobs > 0 { Some(jobs) } else { None };
    let threads = match (requested, env_cap) {
        (Some(j), Some(e)) => Some(j.min(e)),
        (Some(j), None) => Some(j),
        (None, Some(e)) => Some(e),
        (None, None) => None,
    };
    if let Some(n) = threads {
        // Ignore failure: the pool may already exist.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout();
    match cli.command {
        Command::Generate(args) => {
            let cfg = build_config(&args)?;
            init_threads(cfg.jobs);
            cmd_generate(&cfg, &mut stdout)
        }
        Command::Run(args) => {
            let cfg = build_config(&args)?;
            init_threads(cfg.jobs);
            cmd_run(&cfg, &mut stdout)
        }
        Command::Sweep(args) => {
            let cfg = build_config(&args)?;
            init_threads(cfg.jobs);
            cmd_sweep(&cfg, &mut stdout)
        }
        Command::Selfcheck => cmd_selfcheck(&mut stdout),
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
