//! The two-stage network forward pass: stride-1 patching with mean
//! centering, moment projection into feature maps, thresholded
//! binarization, binary hashing and overlapping block-wise histograms.

use crate::error::PipelineError;
use crate::grid::Grid;
use crate::kernels::{moment_project, BankFamily, KernelBank};
use std::io::{Read, Write};

/// Hard cap on hash histogram bins (2^20).
pub const MAX_HASH_LEVELS: usize = 20;

/// Network geometry and thresholding parameters.
#[derive(Debug, Clone)]
pub struct NetConfig {
    pub stages: u8,
    pub l1: usize,
    pub l2: usize,
    pub k1: usize,
    pub k2: usize,
    pub h1: usize,
    pub h2: usize,
    pub overlap: f64,
    pub threshold: f64,
    pub family: BankFamily,
    pub input_size: (usize, usize),
}

impl NetConfig {
    fn err(name: &'static str, value: impl ToString, reason: &'static str) -> PipelineError {
        PipelineError::Config {
            name,
            value: value.to_string(),
            reason,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let (m, n) = self.input_size;
        if m == 0 || n == 0 {
            return Err(Self::err("input_size", format!("{m}x{n}"), "must be positive"));
        }
        if self.stages != 1 && self.stages != 2 {
            return Err(Self::err("stages", self.stages, "must be 1 or 2"));
        }
        if self.l1 == 0 {
            return Err(Self::err("l1", self.l1, "must be at least 1"));
        }
        if self.stages == 2 && self.l2 == 0 {
            return Err(Self::err("l2", self.l2, "must be at least 1"));
        }
        if !(self.k1 > 1 && self.k1 < m) {
            return Err(Self::err("k1", self.k1, "must satisfy 1 < k1 < M"));
        }
        if !(self.k2 > 1 && self.k2 < n) {
            return Err(Self::err("k2", self.k2, "must satisfy 1 < k2 < N"));
        }
        if self.h1 == 0 || self.h1 > m {
            return Err(PipelineError::Geometry {
                name: "h1",
                value: self.h1,
                extent: m,
            });
        }
        if self.h2 == 0 || self.h2 > n {
            return Err(PipelineError::Geometry {
                name: "h2",
                value: self.h2,
                extent: n,
            });
        }
        if !(self.overlap >= 0.0 && self.overlap < 1.0) {
            return Err(Self::err("overlap", self.overlap, "must lie in [0,1)"));
        }
        if !self.threshold.is_finite() {
            return Err(Self::err("threshold", self.threshold, "must be finite"));
        }
        let levels = self.hash_levels();
        if levels == 0 || levels > MAX_HASH_LEVELS {
            let name = if self.stages == 2 { "l2" } else { "l1" };
            return Err(Self::err(name, levels, "hash bin count 2^L must stay within 2^20"));
        }
        Ok(())
    }

    /// Number of binary maps packed into one hashed map.
    pub fn hash_levels(&self) -> usize {
        if self.stages == 2 {
            self.l2
        } else {
            self.l1
        }
    }

    /// Histogram bins per block.
    pub fn bins(&self) -> usize {
        1usize << self.hash_levels()
    }

    /// Sliding-block stride per axis: max(1, round(h (1-R))).
    pub fn strides(&self) -> (usize, usize) {
        let stride = |h: usize| -> usize {
            let s = (h as f64 * (1.0 - self.overlap)).round() as usize;
            s.max(1)
        };
        (stride(self.h1), stride(self.h2))
    }

    /// Block count per axis under floor-based sliding (partial blocks dropped).
    pub fn block_counts(&self) -> (usize, usize) {
        let (sr, sc) = self.strides();
        let (m, n) = self.input_size;
        ((m - self.h1) / sr + 1, (n - self.h2) / sc + 1)
    }

    /// Total block count B.
    pub fn total_blocks(&self) -> usize {
        let (br, bc) = self.block_counts();
        br * bc
    }

    /// Closed-form feature vector length:
    /// L1 * B * 2^L2 for two-stage nets, B * 2^L1 for one-stage nets.
    pub fn feature_len(&self) -> usize {
        let groups = if self.stages == 2 { self.l1 } else { 1 };
        groups * self.total_blocks() * self.bins()
    }
}

/// Where a feature map came from: which image, stage, and filter indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapProvenance {
    pub image_id: u32,
    pub stage: u8,
    pub path: Vec<u16>,
}

/// A real-valued stage output over the full image extent.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    pub grid: Grid<f64>,
    pub provenance: MapProvenance,
}

impl FeatureMap {
    pub fn from_image(grid: Grid<f64>, image_id: u32) -> Self {
        FeatureMap {
            grid,
            provenance: MapProvenance {
                image_id,
                stage: 0,
                path: Vec::new(),
            },
        }
    }
}

/// An integer map of hashed binary codes in [0, 2^levels - 1].
#[derive(Debug, Clone)]
pub struct HashedMap {
    pub grid: Grid<u32>,
    pub levels: usize,
}

/// (groups) x (blocks) x (bins) layout of a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub groups: usize,
    pub blocks: usize,
    pub bins: usize,
}

/// Concatenated block histograms plus their layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f32>,
    pub layout: FeatureLayout,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Fills `patch` with the zero-padded window anchored at (u, v) and
/// subtracts its mean.
fn fill_centered_patch(image: &Grid<f64>, u: usize, v: usize, patch: &mut Grid<f64>) {
    let (m, n) = (image.rows(), image.cols());
    let (k1, k2) = (patch.rows(), patch.cols());
    let top = u as isize - ((k1 - 1) / 2) as isize;
    let left = v as isize - ((k2 - 1) / 2) as isize;
    let mut sum = 0.0;
    for a in 0..k1 {
        let r = top + a as isize;
        for b in 0..k2 {
            let c = left + b as isize;
            let val = if r >= 0 && (r as usize) < m && c >= 0 && (c as usize) < n {
                *image.get(r as usize, c as usize)
            } else {
                0.0
            };
            patch.set(a, b, val);
            sum += val;
        }
    }
    let mean = sum / (k1 * k2) as f64;
    for val in patch.values_mut() {
        *val -= mean;
    }
}

/// Collects the M*N mean-centered k1 x k2 patches, one anchored at every
/// pixel (zero padding at the borders).
pub fn extract_patches(image: &Grid<f64>, k1: usize, k2: usize) -> Vec<Grid<f64>> {
    let mut out = Vec::with_capacity(image.rows() * image.cols());
    for u in 0..image.rows() {
        for v in 0..image.cols() {
            let mut patch = Grid::zeros(k1, k2);
            fill_centered_patch(image, u, v, &mut patch);
            out.push(patch);
        }
    }
    out
}

/// Projects every centered patch of `input` onto the bank, producing one
/// full-extent map per filter.
fn stage_maps(input: &Grid<f64>, bank: &KernelBank) -> Result<Vec<Grid<f64>>, PipelineError> {
    let (m, n) = (input.rows(), input.cols());
    let mut out: Vec<Grid<f64>> = (0..bank.len()).map(|_| Grid::zeros(m, n)).collect();
    let mut patch = Grid::zeros(bank.rows(), bank.cols());
    for u in 0..m {
        for v in 0..n {
            fill_centered_patch(input, u, v, &mut patch);
            let coeffs = moment_project(&patch, bank)?;
            for (j, c) in coeffs.into_iter().enumerate() {
                out[j].set(u, v, c);
            }
        }
    }
    Ok(out)
}

/// Runs one network stage: every input map fans out into `bank.len()` maps.
pub fn run_stage(
    inputs: &[FeatureMap],
    bank: &KernelBank,
) -> Result<Vec<FeatureMap>, PipelineError> {
    let mut out = Vec::with_capacity(inputs.len() * bank.len());
    for input in inputs {
        let maps = stage_maps(&input.grid, bank)?;
        for (j, grid) in maps.into_iter().enumerate() {
            let mut path = input.provenance.path.clone();
            path.push(j as u16);
            out.push(FeatureMap {
                grid,
                provenance: MapProvenance {
                    image_id: input.provenance.image_id,
                    stage: input.provenance.stage + 1,
                    path,
                },
            });
        }
    }
    Ok(out)
}

/// Modified Heaviside: 1 iff value >= t.
pub fn binarize(map: &Grid<f64>, t: f64) -> Grid<u8> {
    let data = map.values().iter().map(|&v| u8::from(v >= t)).collect();
    Grid::from_vec(map.rows(), map.cols(), data)
}

/// Packs L binary maps into one integer map; map k (1-based) carries bit
/// weight 2^{k-1}.
pub fn hash_maps(binary_maps: &[Grid<u8>]) -> Result<HashedMap, PipelineError> {
    let levels = binary_maps.len();
    if levels == 0 || levels > MAX_HASH_LEVELS {
        return Err(PipelineError::Config {
            name: "levels",
            value: levels.to_string(),
            reason: "hashing requires between 1 and 20 binary maps",
        });
    }
    let first = &binary_maps[0];
    let mut grid: Grid<u32> = Grid::filled(first.rows(), first.cols(), 0);
    for (k, map) in binary_maps.iter().enumerate() {
        if !map.same_shape(first) {
            return Err(PipelineError::MapShape {
                expected_rows: first.rows(),
                expected_cols: first.cols(),
                got_rows: map.rows(),
                got_cols: map.cols(),
            });
        }
        let weight = 1u32 << k;
        for (acc, &bit) in grid.values_mut().iter_mut().zip(map.values()) {
            *acc += weight * bit as u32;
        }
    }
    Ok(HashedMap { grid, levels })
}

/// Recovers the binary maps from a hashed map, bit by bit.
pub fn unhash_maps(hashed: &HashedMap) -> Vec<Grid<u8>> {
    (0..hashed.levels)
        .map(|k| {
            let data = hashed
                .grid
                .values()
                .iter()
                .map(|&v| ((v >> k) & 1) as u8)
                .collect();
            Grid::from_vec(hashed.grid.rows(), hashed.grid.cols(), data)
        })
        .collect()
}

/// Slides an h1 x h2 block with overlap ratio R and emits one histogram of
/// `bins` counts per block position; every histogram sums to h1*h2.
pub fn block_histogram(
    hashed: &HashedMap,
    h1: usize,
    h2: usize,
    overlap: f64,
    bins: usize,
) -> Result<Vec<f32>, PipelineError> {
    let (m, n) = (hashed.grid.rows(), hashed.grid.cols());
    if h1 == 0 || h1 > m {
        return Err(PipelineError::Geometry {
            name: "h1",
            value: h1,
            extent: m,
        });
    }
    if h2 == 0 || h2 > n {
        return Err(PipelineError::Geometry {
            name: "h2",
            value: h2,
            extent: n,
        });
    }
    if !(overlap >= 0.0 && overlap < 1.0) {
        return Err(PipelineError::Config {
            name: "overlap",
            value: overlap.to_string(),
            reason: "must lie in [0,1)",
        });
    }
    let stride = |h: usize| ((h as f64 * (1.0 - overlap)).round() as usize).max(1);
    let (sr, sc) = (stride(h1), stride(h2));
    let (br, bc) = ((m - h1) / sr + 1, (n - h2) / sc + 1);
    let mut out = Vec::with_capacity(br * bc * bins);
    let mut hist = vec![0.0f32; bins];
    for bi in 0..br {
        for bj in 0..bc {
            hist.iter_mut().for_each(|h| *h = 0.0);
            let (r0, c0) = (bi * sr, bj * sc);
            for r in r0..r0 + h1 {
                for c in c0..c0 + h2 {
                    let v = *hashed.grid.get(r, c) as usize;
                    debug_assert!(v < bins, "hashed value exceeds bin count");
                    hist[v] += 1.0;
                }
            }
            out.extend_from_slice(&hist);
        }
    }
    Ok(out)
}

/// First- and optional second-stage filter banks.
#[derive(Debug, Clone)]
pub struct Banks {
    pub first: KernelBank,
    pub second: Option<KernelBank>,
}

impl Banks {
    fn check(&self, config: &NetConfig) -> Result<(), PipelineError> {
        if self.first.len() != config.l1 {
            return Err(PipelineError::Config {
                name: "l1",
                value: self.first.len().to_string(),
                reason: "first bank size must equal l1",
            });
        }
        match (config.stages, &self.second) {
            (2, Some(second)) if second.len() != config.l2 => Err(PipelineError::Config {
                name: "l2",
                value: second.len().to_string(),
                reason: "second bank size must equal l2",
            }),
            (2, None) => Err(PipelineError::Config {
                name: "stages",
                value: "2".to_string(),
                reason: "two-stage config needs a second bank",
            }),
            _ => Ok(()),
        }
    }
}

/// The full forward pass for one image.
pub fn extract_features(
    image: &Grid<f64>,
    config: &NetConfig,
    banks: &Banks,
) -> Result<FeatureVector, PipelineError> {
    config.validate()?;
    banks.check(config)?;
    if image.rows() != config.input_size.0 || image.cols() != config.input_size.1 {
        return Err(PipelineError::MapShape {
            expected_rows: config.input_size.0,
            expected_cols: config.input_size.1,
            got_rows: image.rows(),
            got_cols: image.cols(),
        });
    }
    let bins = config.bins();
    let first_maps = stage_maps(image, &banks.first)?;
    let mut values = Vec::with_capacity(config.feature_len());
    match config.stages {
        1 => {
            let binary: Vec<Grid<u8>> = first_maps
                .iter()
                .map(|m| binarize(m, config.threshold))
                .collect();
            let hashed = hash_maps(&binary)?;
            values.extend(block_histogram(
                &hashed,
                config.h1,
                config.h2,
                config.overlap,
                bins,
            )?);
        }
        2 => {
            let second = banks.second.as_ref().expect("checked above");
            for map in &first_maps {
                let child_maps = stage_maps(map, second)?;
                let binary: Vec<Grid<u8>> = child_maps
                    .iter()
                    .map(|m| binarize(m, config.threshold))
                    .collect();
                let hashed = hash_maps(&binary)?;
                values.extend(block_histogram(
                    &hashed,
                    config.h1,
                    config.h2,
                    config.overlap,
                    bins,
                )?);
            }
        }
        _ => unreachable!("validated above"),
    }
    let layout = FeatureLayout {
        groups: if config.stages == 2 { config.l1 } else { 1 },
        blocks: config.total_blocks(),
        bins,
    };
    debug_assert_eq!(values.len(), config.feature_len());
    Ok(FeatureVector { values, layout })
}

/// First-stage maps of an image, as used for threshold calibration.
pub fn first_stage_maps(
    image: &Grid<f64>,
    bank: &KernelBank,
) -> Result<Vec<Grid<f64>>, PipelineError> {
    stage_maps(image, bank)
}

/// Fraction of ones across a set of binary maps.
pub fn ones_fraction(maps: &[Grid<u8>]) -> f64 {
    let total: usize = maps.iter().map(|m| m.len()).sum();
    if total == 0 {
        return 0.0;
    }
    let ones: usize = maps
        .iter()
        .map(|m| m.values().iter().filter(|&&v| v == 1).count())
        .sum();
    ones as f64 / total as f64
}

/// Resolution of the auto-threshold bisection.
const THRESHOLD_RESOLUTION: f64 = 1e-4;

/// Finds the smallest threshold whose ones-fraction over the pooled map
/// values lands inside `target`, by bisection; ones-fraction is
/// non-increasing in t, which guarantees convergence.
pub fn auto_threshold(maps: &[Grid<f64>], target: (f64, f64)) -> Result<f64, PipelineError> {
    let (lo, hi) = target;
    assert!(
        (0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0,
        "target must be a sub-interval of [0,1]"
    );
    let mut pooled: Vec<f64> = maps
        .iter()
        .flat_map(|m| m.values().iter().copied())
        .collect();
    assert!(!pooled.is_empty(), "auto_threshold requires non-empty maps");
    pooled.sort_by(|a, b| a.partial_cmp(b).expect("finite map values"));
    let total = pooled.len() as f64;
    // Fraction of values >= t.
    let fraction = |t: f64| -> f64 {
        let below = pooled.partition_point(|&v| v < t);
        (pooled.len() - below) as f64 / total
    };
    let vmin = pooled[0];
    let vmax = pooled[pooled.len() - 1];
    if fraction(vmin) <= hi {
        // Everything already qualifies against the upper bound.
        return Ok(vmin);
    }
    let mut t_lo = vmin; // fraction(t_lo) > hi
    let mut t_hi = vmax + THRESHOLD_RESOLUTION; // fraction(t_hi) <= hi
    while t_hi - t_lo > THRESHOLD_RESOLUTION {
        let mid = 0.5 * (t_lo + t_hi);
        if fraction(mid) > hi {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    let achieved = fraction(t_hi);
    if achieved >= lo {
        Ok(t_hi)
    } else {
        Err(PipelineError::ThresholdSearch {
            above: fraction(t_lo),
            below: achieved,
            target_lo: lo,
            target_hi: hi,
        })
    }
}

const FEATURE_MAGIC: &[u8; 4] = b"MNFV";
const FEATURE_VERSION: u8 = 1;

/// Writes feature rows as CSV: id, label, then the values.
pub fn write_features_csv(
    out: &mut impl Write,
    rows: &[(u32, u32, &[f32])],
) -> std::io::Result<()> {
    for (id, label, values) in rows {
        let mut line = format!("{id},{label}");
        for v in *values {
            line.push(',');
            line.push_str(&format!("{v}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Writes the compact binary container: magic "MNFV", version u8, u32 LE
/// counts (images, dims), then 32-bit floats row-major.
pub fn write_features_bin(out: &mut impl Write, rows: &[&[f32]]) -> std::io::Result<()> {
    out.write_all(FEATURE_MAGIC)?;
    out.write_all(&[FEATURE_VERSION])?;
    let images = rows.len() as u32;
    let dims = rows.first().map_or(0, |r| r.len()) as u32;
    out.write_all(&images.to_le_bytes())?;
    out.write_all(&dims.to_le_bytes())?;
    for row in rows {
        assert_eq!(row.len(), dims as usize, "ragged feature rows");
        for v in *row {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads back a feature container written by [`write_features_bin`].
pub fn read_features_bin(input: &mut impl Read) -> std::io::Result<Vec<Vec<f32>>> {
    use std::io::{Error, ErrorKind};
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != FEATURE_MAGIC {
        return Err(Error::new(ErrorKind::InvalidData, "bad feature magic"));
    }
    let mut version = [0u8; 1];
    input.read_exact(&mut version)?;
    if version[0] != FEATURE_VERSION {
        return Err(Error::new(ErrorKind::InvalidData, "unsupported feature version"));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let images = u32::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let dims = u32::from_le_bytes(word) as usize;
    let mut rows = Vec::with_capacity(images);
    for _ in 0..images {
        let mut row = Vec::with_capacity(dims);
        for _ in 0..dims {
            input.read_exact(&mut word)?;
            row.push(f32::from_le_bytes(word));
        }
        rows.push(row);
    }
    Ok(rows)
}
