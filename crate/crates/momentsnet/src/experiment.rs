//! Experiment orchestration behind the CLI: dataset resolution, bank
//! construction (moment or learned PCA), threshold calibration, feature
//! extraction, training, evaluation, sweeps and artifact files.

use crate::classifier::{self, LinearModel, TrainParams};
use crate::config::ExperimentConfig;
use crate::data::shapes::{generate_shapes, ShapeGenConfig};
use crate::data::{load_dataset, rescale, split, write_dataset, Dataset, Image};
use crate::error::{ClassifierError, DataError, KernelError, PcaError, PipelineError};
use crate::grid::Grid;
use crate::kernels::{
    build_kernel_bank, enumerate_orders, moment_project, BankFamily, KernelBank, MomentFamily,
};
use crate::pca::{learn_from_covariance, PatchCovariance};
use crate::pipeline::{
    auto_threshold, binarize, extract_features, extract_patches, first_stage_maps, ones_fraction,
    write_features_bin, write_features_csv, Banks, FeatureVector, NetConfig,
};
use crate::selfcheck::{run_selfchecks, SelfcheckOptions};
use rayon::prelude::*;
use std::fs;
use std::time::Instant;

/// Images sampled (in dataset order) for threshold calibration.
const CALIBRATION_IMAGES_ONE_STAGE: usize = 64;
const CALIBRATION_IMAGES_TWO_STAGE: usize = 12;

/// Images sampled for the second-stage PCA covariance.
const PCA_STAGE2_IMAGES: usize = 96;

/// Target ones-fraction band for automatic threshold selection.
pub const AUTO_THRESHOLD_TARGET: (f64, f64) = (0.4, 0.5);

/// Top-level failure classes, mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad parameters or geometry (exit code 2).
    Config(String),
    /// Filesystem or file-format trouble (exit code 3).
    Io(String),
    /// A selfcheck property failed (exit code 4).
    Selfcheck,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Selfcheck => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
            CliError::Selfcheck => write!(f, "selfcheck failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PcaError> for CliError {
    fn from(e: PcaError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::InvalidCounts(_)
            | DataError::InvalidFraction(_)
            | DataError::ClassTooSmall { .. } => CliError::Config(e.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Wall-clock seconds per phase; reported alongside (not inside) the
/// byte-stable results file.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub extract: f64,
    pub train: f64,
    pub eval: f64,
}

impl PhaseTimings {
    pub fn total(&self) -> f64 {
        self.extract + self.train + self.eval
    }
}

/// Metrics of one finished run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub family: String,
    pub stages: u8,
    pub l1: usize,
    pub l2: usize,
    pub k: usize,
    pub h: usize,
    pub overlap: f64,
    pub threshold: f64,
    pub ones: f64,
    pub train_acc: f64,
    pub test_acc: f64,
    pub feat_dim: usize,
}

fn parse_bank_family(name: &str) -> Result<BankFamily, CliError> {
    if name.eq_ignore_ascii_case("pca") {
        return Ok(BankFamily::Pca);
    }
    MomentFamily::parse(name)
        .map(BankFamily::Moment)
        .ok_or_else(|| CliError::Config(format!("unknown family '{name}'")))
}

/// Loads the configured dataset or generates the synthetic one, and brings
/// every image to the experiment geometry.
pub fn resolve_dataset(cfg: &ExperimentConfig) -> Result<Dataset, CliError> {
    cfg.validate_sources()?;
    let mut dataset = match &cfg.dataset {
        Some(path) => load_dataset(path)?,
        None => generate_shapes(&ShapeGenConfig {
            classes: cfg.classes,
            rotations: cfg.rotations,
            replicas: cfg.replicas,
            size: cfg.size,
            seed: cfg.seed,
        })?,
    };
    let target = (cfg.size, cfg.size);
    for img in &mut dataset.images {
        if img.grid.rows() != target.0 || img.grid.cols() != target.1 {
            *img = rescale(img, target);
        }
    }
    Ok(dataset)
}

fn net_config(cfg: &ExperimentConfig, family: BankFamily, threshold: f64) -> NetConfig {
    NetConfig {
        stages: cfg.stages,
        l1: cfg.l1,
        l2: cfg.l2,
        k1: cfg.k,
        k2: cfg.k,
        h1: cfg.h,
        h2: cfg.h,
        overlap: cfg.overlap,
        threshold,
        family,
        input_size: (cfg.size, cfg.size),
    }
}

/// Builds the stage banks. Moment banks depend only on the config; PCA
/// banks are learned from the training images (second stage from the
/// first-stage output maps, per the cascade).
pub fn build_banks(
    cfg: &ExperimentConfig,
    family: &BankFamily,
    train: &Dataset,
) -> Result<Banks, CliError> {
    match family {
        BankFamily::Moment(f) => {
            let first = build_kernel_bank(f, cfg.k, cfg.k, cfg.l1)?;
            let second = if cfg.stages == 2 {
                Some(build_kernel_bank(f, cfg.k, cfg.k, cfg.l2)?)
            } else {
                None
            };
            Ok(Banks { first, second })
        }
        BankFamily::Pca => {
            let dim = cfg.k * cfg.k;
            let mut cov = PatchCovariance::new(dim);
            for img in &train.images {
                for patch in extract_patches(&img.grid, cfg.k, cfg.k) {
                    cov.accumulate(patch.values());
                }
            }
            let (first, _) = learn_from_covariance(&cov, cfg.k, cfg.k, cfg.l1)?;
            let second = if cfg.stages == 2 {
                let mut cov2 = PatchCovariance::new(dim);
                for img in train.images.iter().take(PCA_STAGE2_IMAGES) {
                    for map in first_stage_maps(&img.grid, &first)? {
                        for patch in extract_patches(&map, cfg.k, cfg.k) {
                            cov2.accumulate(patch.values());
                        }
                    }
                }
                let (bank2, _) = learn_from_covariance(&cov2, cfg.k, cfg.k, cfg.l2)?;
                Some(bank2)
            } else {
                None
            };
            Ok(Banks { first, second })
        }
    }
}

/// The maps that binarization will see, from a calibration subsample of the
/// training set.
fn calibration_maps(
    cfg: &ExperimentConfig,
    banks: &Banks,
    train: &Dataset,
) -> Result<Vec<Grid<f64>>, CliError> {
    let sample = if cfg.stages == 2 {
        CALIBRATION_IMAGES_TWO_STAGE
    } else {
        CALIBRATION_IMAGES_ONE_STAGE
    };
    let images: Vec<&Image> = train.images.iter().take(sample).collect();
    let nested: Vec<Vec<Grid<f64>>> = images
        .par_iter()
        .map(|img| -> Result<Vec<Grid<f64>>, PipelineError> {
            let first = first_stage_maps(&img.grid, &banks.first)?;
            if cfg.stages == 2 {
                let second_bank = banks.second.as_ref().expect("two-stage banks");
                let mut all = Vec::with_capacity(first.len() * second_bank.len());
                for map in &first {
                    all.extend(first_stage_maps(map, second_bank)?);
                }
                Ok(all)
            } else {
                Ok(first)
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Resolves the binarization threshold and measures the resulting
/// ones-fraction on the calibration maps.
pub fn resolve_threshold(
    cfg: &ExperimentConfig,
    banks: &Banks,
    train: &Dataset,
) -> Result<(f64, f64), CliError> {
    let maps = calibration_maps(cfg, banks, train)?;
    let threshold = if cfg.auto_threshold {
        auto_threshold(&maps, AUTO_THRESHOLD_TARGET)?
    } else {
        cfg.threshold
    };
    let binary: Vec<Grid<u8>> = maps.iter().map(|m| binarize(m, threshold)).collect();
    Ok((threshold, ones_fraction(&binary)))
}

/// Feature extraction over a whole image list, parallel and order-stable.
pub fn extract_all(
    images: &[Image],
    config: &NetConfig,
    banks: &Banks,
) -> Result<Vec<FeatureVector>, CliError> {
    let features: Result<Vec<FeatureVector>, PipelineError> = images
        .par_iter()
        .map(|img| extract_features(&img.grid, config, banks))
        .collect();
    Ok(features?)
}

fn labels_of(dataset: &Dataset) -> Vec<u32> {
    dataset
        .images
        .iter()
        .map(|img| img.label.expect("labelled dataset"))
        .collect()
}

/// Runs the full protocol once: split, banks, threshold, features, train,
/// evaluate.
pub fn run_experiment(
    cfg: &ExperimentConfig,
) -> Result<(RunOutcome, LinearModel, PhaseTimings, TrainTestFeatures), CliError> {
    let family = parse_bank_family(&cfg.family)?;
    let dataset = resolve_dataset(cfg)?;
    let (train, test) = split(&dataset, cfg.train_fraction, cfg.seed)?;

    let t_extract = Instant::now();
    let banks = build_banks(cfg, &family, &train)?;
    let (threshold, ones) = resolve_threshold(cfg, &banks, &train)?;
    let net = net_config(cfg, family.clone(), threshold);
    net.validate()?;
    let train_features = extract_all(&train.images, &net, &banks)?;
    let test_features = extract_all(&test.images, &net, &banks)?;
    let extract_seconds = t_extract.elapsed().as_secs_f64();

    let train_labels = labels_of(&train);
    let test_labels = labels_of(&test);
    let t_train = Instant::now();
    let train_refs: Vec<&[f32]> = train_features.iter().map(|f| f.values.as_slice()).collect();
    let params = TrainParams {
        c: cfg.c,
        max_epochs: cfg.epochs,
        seed: cfg.seed,
    };
    let model = classifier::train(&train_refs, &train_labels, &params)?;
    let train_seconds = t_train.elapsed().as_secs_f64();

    let t_eval = Instant::now();
    let test_refs: Vec<&[f32]> = test_features.iter().map(|f| f.values.as_slice()).collect();
    let train_acc = classifier::accuracy(&model, &train_refs, &train_labels)?;
    let test_acc = classifier::accuracy(&model, &test_refs, &test_labels)?;
    let eval_seconds = t_eval.elapsed().as_secs_f64();

    let outcome = RunOutcome {
        family: cfg.family.clone(),
        stages: cfg.stages,
        l1: cfg.l1,
        l2: cfg.l2,
        k: cfg.k,
        h: cfg.h,
        overlap: cfg.overlap,
        threshold,
        ones,
        train_acc,
        test_acc,
        feat_dim: net.feature_len(),
    };
    let timings = PhaseTimings {
        extract: extract_seconds,
        train: train_seconds,
        eval: eval_seconds,
    };
    let features = TrainTestFeatures {
        train: train_features,
        train_labels,
        test: test_features,
        test_labels,
    };
    Ok((outcome, model, timings, features))
}

/// Extracted features and labels for both splits.
#[derive(Debug)]
pub struct TrainTestFeatures {
    pub train: Vec<FeatureVector>,
    pub train_labels: Vec<u32>,
    pub test: Vec<FeatureVector>,
    pub test_labels: Vec<u32>,
}

/// Header of the per-run results file. The wall_seconds column is pinned to
/// 0.000 so reruns stay byte-identical; measured times live in timings.csv.
const RESULTS_HEADER: &str = "family,stages,l1,k1,h1,r,t,train_acc,test_acc,feat_dim,wall_seconds\n";

fn results_row(outcome: &RunOutcome) -> String {
    format!(
        "{},{},{},{},{},{:.3},{:.6},{:.6},{:.6},{},0.000\n",
        outcome.family,
        outcome.stages,
        outcome.l1,
        outcome.k,
        outcome.h,
        outcome.overlap,
        outcome.threshold,
        outcome.train_acc,
        outcome.test_acc,
        outcome.feat_dim
    )
}

/// `run` command: one experiment, writing results.csv, timings.csv and
/// model.bin under the output directory.
pub fn cmd_run(cfg: &ExperimentConfig, out: &mut impl std::io::Write) -> Result<(), CliError> {
    let (outcome, model, timings, features) = run_experiment(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let mut results = String::from(RESULTS_HEADER);
    results.push_str(&results_row(&outcome));
    fs::write(cfg.out.join("results.csv"), results)?;
    fs::write(
        cfg.out.join("timings.csv"),
        format!(
            "phase,seconds\nextract,{:.3}\ntrain,{:.3}\neval,{:.3}\ntotal,{:.3}\n",
            timings.extract,
            timings.train,
            timings.eval,
            timings.total()
        ),
    )?;
    model.save(&cfg.out.join("model.bin"))?;
    if cfg.dump_features {
        dump_features(cfg, &features)?;
    }
    writeln!(
        out,
        "{}-{} quintet (L1={}, k={}, h={}, R={}, t={:.6}): train {:.4}, test {:.4}, dim {}, ones {:.3} [{:.1}s]",
        outcome.family,
        outcome.stages,
        outcome.l1,
        outcome.k,
        outcome.h,
        outcome.overlap,
        outcome.threshold,
        outcome.train_acc,
        outcome.test_acc,
        outcome.feat_dim,
        outcome.ones,
        timings.total()
    )?;
    Ok(())
}

fn dump_features(cfg: &ExperimentConfig, features: &TrainTestFeatures) -> Result<(), CliError> {
    for (name, vectors, labels) in [
        ("train_features", &features.train, &features.train_labels),
        ("test_features", &features.test, &features.test_labels),
    ] {
        let refs: Vec<&[f32]> = vectors.iter().map(|f| f.values.as_slice()).collect();
        let mut bin = fs::File::create(cfg.out.join(format!("{name}.bin")))?;
        write_features_bin(&mut bin, &refs)?;
        let rows: Vec<(u32, u32, &[f32])> = refs
            .iter()
            .enumerate()
            .map(|(i, r)| (i as u32, labels[i], *r))
            .collect();
        let mut csv = fs::File::create(cfg.out.join(format!("{name}.csv")))?;
        write_features_csv(&mut csv, &rows)?;
    }
    Ok(())
}

const SWEEP_HEADER: &str =
    "family,stages,l1,l2,k1,k2,h1,h2,r,t,ones_fraction,train_acc,test_acc,feat_dim\n";

/// `sweep` command: cross-product evaluation with one CSV row per point.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &mut impl std::io::Write) -> Result<(), CliError> {
    cfg.validate_sources()?;
    let points = cfg.sweep_points();
    let rows: Result<Vec<(RunOutcome, PhaseTimings)>, CliError> = points
        .par_iter()
        .map(|point| {
            let point_cfg = cfg.with_sweep_point(point);
            let (outcome, _, timings, _) = run_experiment(&point_cfg)?;
            Ok((outcome, timings))
        })
        .collect();
    let rows = rows?;
    fs::create_dir_all(&cfg.out)?;
    let mut csv = String::from(SWEEP_HEADER);
    for (o, _) in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.3},{:.6},{:.6},{:.6},{:.6},{}\n",
            o.family,
            o.stages,
            o.l1,
            o.l2,
            o.k,
            o.k,
            o.h,
            o.h,
            o.overlap,
            o.threshold,
            o.ones,
            o.train_acc,
            o.test_acc,
            o.feat_dim
        ));
    }
    fs::write(cfg.out.join("sweep.csv"), csv)?;
    for (o, t) in &rows {
        writeln!(
            out,
            "t={:.6} L1={} k={} h={} R={}: test {:.4} (ones {:.3}) [{:.1}s]",
            o.threshold, o.l1, o.k, o.h, o.overlap, o.test_acc, o.ones, t.total()
        )?;
    }
    writeln!(out, "{} sweep points -> {}", rows.len(), cfg.out.join("sweep.csv").display())?;
    Ok(())
}

/// `generate` command: writes the synthetic dataset in the directory layout
/// `root/<class>/<index>.pgm` plus manifest.csv.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &mut impl std::io::Write) -> Result<(), CliError> {
    if cfg.dataset.is_some() {
        return Err(CliError::Config(
            "generate writes a synthetic dataset; --dataset is not applicable".into(),
        ));
    }
    let dataset = generate_shapes(&ShapeGenConfig {
        classes: cfg.classes,
        rotations: cfg.rotations,
        replicas: cfg.replicas,
        size: cfg.size,
        seed: cfg.seed,
    })?;
    let manifest = write_dataset(&dataset, &cfg.out)?;
    for (name, count) in dataset.class_names.iter().zip(dataset.class_counts()) {
        writeln!(out, "{name}: {count} images")?;
    }
    writeln!(out, "manifest: {}", manifest.display())?;
    Ok(())
}

/// `selfcheck` command: runs the kernel property suites and prints one line
/// per property.
pub fn cmd_selfcheck(out: &mut impl std::io::Write) -> Result<(), CliError> {
    let reports = run_selfchecks(&SelfcheckOptions::default());
    let mut all_passed = true;
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{status} {name}: max deviation {dev:.3e} (tolerance {tol:.0e})",
            name = r.name,
            dev = r.max_deviation,
            tol = r.tolerance
        )?;
        all_passed &= r.passed();
    }
    if all_passed {
        Ok(())
    } else {
        Err(CliError::Selfcheck)
    }
}

/// Number of family-valid orders with total n+|m| at most `max_total`.
pub fn orders_up_to_total(family: &MomentFamily, max_total: u32) -> usize {
    enumerate_orders(family, 4096)
        .iter()
        .take_while(|o| o.total() <= max_total)
        .count()
}

/// Whole-image moment features: the classical moments-plus-classifier
/// baseline the networks are compared against.
pub fn raw_moment_features(
    images: &[Image],
    family: &MomentFamily,
    max_total: u32,
) -> Result<Vec<Vec<f32>>, CliError> {
    assert!(!images.is_empty());
    let rows = images[0].grid.rows();
    let cols = images[0].grid.cols();
    let l = orders_up_to_total(family, max_total);
    let bank: KernelBank = build_kernel_bank(family, rows, cols, l)?;
    let features: Result<Vec<Vec<f32>>, KernelError> = images
        .par_iter()
        .map(|img| {
            moment_project(&img.grid, &bank)
                .map(|v| v.into_iter().map(|x| x as f32).collect())
        })
        .collect();
    Ok(features?)
}
