//! Image ingestion, rescaling, the synthetic rotated-shape dataset, and
//! deterministic train/test splitting.

pub mod shapes;

use crate::error::DataError;
use crate::grid::Grid;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Sanity cap on total pixel count when loading images.
const MAX_PIXELS: u64 = 1 << 26;

/// A single grayscale image with values in [0, 1].
#[derive(Debug, Clone)]
pub struct Image {
    pub grid: Grid<f64>,
    pub label: Option<u32>,
}

impl Image {
    pub fn new(grid: Grid<f64>, label: Option<u32>) -> Self {
        let mut grid = grid;
        for v in grid.values_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        Image { grid, label }
    }
}

/// A labelled image collection.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub images: Vec<Image>,
    pub class_names: Vec<String>,
    pub provenance: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Image count per class label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_names.len()];
        for img in &self.images {
            if let Some(label) = img.label {
                counts[label as usize] += 1;
            }
        }
        counts
    }
}

fn corrupt(reason: impl Into<String>) -> DataError {
    DataError::CorruptHeader(reason.into())
}

/// Parses ASCII header tokens of a PGM, skipping `#` comments.
struct PgmTokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmTokens<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        PgmTokens { bytes, pos: 0 }
    }

    fn next_token(&mut self) -> Result<&'a [u8], DataError> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos >= self.bytes.len() {
                return Err(corrupt("unexpected end of header"));
            }
            if self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            let start = self.pos;
            while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            return Ok(&self.bytes[start..self.pos]);
        }
    }

    fn next_number(&mut self) -> Result<u64, DataError> {
        let token = self.next_token()?;
        let text = std::str::from_utf8(token).map_err(|_| corrupt("non-ASCII header token"))?;
        text.parse::<u64>()
            .map_err(|_| corrupt(format!("bad numeric token '{text}'")))
    }
}

fn load_pgm(bytes: &[u8]) -> Result<Image, DataError> {
    let binary = bytes.starts_with(b"P5");
    let mut tokens = PgmTokens::new(bytes);
    let magic = tokens.next_token()?;
    if magic != b"P2" && magic != b"P5" {
        return Err(DataError::UnsupportedFormat(
            String::from_utf8_lossy(magic).into_owned(),
        ));
    }
    let width = tokens.next_number()?;
    let height = tokens.next_number()?;
    if width == 0 || height == 0 || width.saturating_mul(height) > MAX_PIXELS {
        return Err(DataError::DimensionOverflow { width, height });
    }
    let maxval = tokens.next_number()?;
    if maxval == 0 || maxval > 255 {
        return Err(DataError::UnsupportedFormat(format!(
            "PGM maxval {maxval}; only 8-bit supported"
        )));
    }
    let count = (width * height) as usize;
    let mut data = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from raster data.
        let start = tokens.pos + 1;
        if bytes.len() < start + count {
            return Err(corrupt("truncated P5 raster"));
        }
        data.extend(
            bytes[start..start + count]
                .iter()
                .map(|&b| b as f64 / maxval as f64),
        );
    } else {
        for _ in 0..count {
            let v = tokens
                .next_number()
                .map_err(|_| corrupt("truncated P2 raster"))?;
            if v > maxval {
                return Err(corrupt(format!("sample {v} exceeds maxval {maxval}")));
            }
            data.push(v as f64 / maxval as f64);
        }
    }
    Ok(Image::new(
        Grid::from_vec(height as usize, width as usize, data),
        None,
    ))
}

fn load_png(path: &Path) -> Result<Image, DataError> {
    let decoded = image::open(path)
        .map_err(|e| corrupt(format!("PNG decode failed: {e}")))?;
    match decoded {
        image::DynamicImage::ImageLuma8(img) => {
            let (width, height) = (img.width() as u64, img.height() as u64);
            if width == 0 || height == 0 || width * height > MAX_PIXELS {
                return Err(DataError::DimensionOverflow { width, height });
            }
            let data = img.pixels().map(|p| p.0[0] as f64 / 255.0).collect();
            Ok(Image::new(
                Grid::from_vec(height as usize, width as usize, data),
                None,
            ))
        }
        other => Err(DataError::UnsupportedFormat(format!(
            "PNG with {} channels; only single-channel grayscale supported",
            other.color().channel_count()
        ))),
    }
}

/// Loads a binary/8-bit grayscale PGM (P2/P5) or single-channel PNG.
pub fn load_image(path: &Path) -> Result<Image, DataError> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        load_pgm(&bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        load_png(path)
    } else {
        Err(DataError::UnsupportedFormat(format!(
            "unrecognized magic in {}",
            path.display()
        )))
    }
}

/// Writes a [0,1] grid as a binary (P5) 8-bit PGM.
pub fn save_pgm(path: &Path, grid: &Grid<f64>) -> Result<(), DataError> {
    let mut out = Vec::with_capacity(grid.len() + 32);
    write!(out, "P5\n{} {}\n255\n", grid.cols(), grid.rows())?;
    out.extend(
        grid.values()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    fs::write(path, out)?;
    Ok(())
}

/// Bilinear rescale to `target` = (rows, cols); identity when sizes match.
pub fn rescale(image: &Image, target: (usize, usize)) -> Image {
    let (tr, tc) = target;
    assert!(tr > 0 && tc > 0, "target dimensions must be positive");
    let src = &image.grid;
    if src.rows() == tr && src.cols() == tc {
        return image.clone();
    }
    let mut out = Grid::zeros(tr, tc);
    let row_scale = src.rows() as f64 / tr as f64;
    let col_scale = src.cols() as f64 / tc as f64;
    for r in 0..tr {
        // Center-aligned source coordinate.
        let sr = ((r as f64 + 0.5) * row_scale - 0.5).clamp(0.0, (src.rows() - 1) as f64);
        let r0 = sr.floor() as usize;
        let r1 = (r0 + 1).min(src.rows() - 1);
        let fr = sr - r0 as f64;
        for c in 0..tc {
            let sc = ((c as f64 + 0.5) * col_scale - 0.5).clamp(0.0, (src.cols() - 1) as f64);
            let c0 = sc.floor() as usize;
            let c1 = (c0 + 1).min(src.cols() - 1);
            let fc = sc - c0 as f64;
            let v = src.get(r0, c0) * (1.0 - fr) * (1.0 - fc)
                + src.get(r0, c1) * (1.0 - fr) * fc
                + src.get(r1, c0) * fr * (1.0 - fc)
                + src.get(r1, c1) * fr * fc;
            out.set(r, c, v.clamp(0.0, 1.0));
        }
    }
    Image {
        grid: out,
        label: image.label,
    }
}

/// Stratified seeded split into (train, test).
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::InvalidFraction(train_fraction));
    }
    let num_classes = dataset.class_names.len();
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (idx, img) in dataset.images.iter().enumerate() {
        let label = img
            .label
            .ok_or_else(|| DataError::Manifest("unlabelled image in split".into()))? as usize;
        per_class[label].push(idx);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (class, indices) in per_class.iter().enumerate() {
        if indices.len() < 2 {
            return Err(DataError::ClassTooSmall {
                class,
                count: indices.len(),
            });
        }
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        let n_train = ((indices.len() as f64 * train_fraction).round() as usize)
            .clamp(1, indices.len() - 1);
        train_idx.extend_from_slice(&shuffled[..n_train]);
        test_idx.extend_from_slice(&shuffled[n_train..]);
    }
    // Deterministic output order regardless of shuffle internals.
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize], tag: &str| Dataset {
        images: idx.iter().map(|&i| dataset.images[i].clone()).collect(),
        class_names: dataset.class_names.clone(),
        provenance: format!("{} [{tag} split, fraction {train_fraction}, seed {seed}]", dataset.provenance),
    };
    Ok((pick(&train_idx, "train"), pick(&test_idx, "test")))
}

/// Writes `root/<class_name>/<index>.pgm` plus `manifest.csv`
/// (columns path,label,class_name).
pub fn write_dataset(dataset: &Dataset, root: &Path) -> Result<PathBuf, DataError> {
    fs::create_dir_all(root)?;
    let mut manifest = String::from("path,label,class_name\n");
    let mut per_class_counter = vec![0usize; dataset.class_names.len()];
    for img in &dataset.images {
        let label = img
            .label
            .ok_or_else(|| DataError::Manifest("unlabelled image in dataset".into()))?;
        let class_name = &dataset.class_names[label as usize];
        let class_dir = root.join(class_name);
        fs::create_dir_all(&class_dir)?;
        let index = per_class_counter[label as usize];
        per_class_counter[label as usize] += 1;
        let rel = format!("{class_name}/{index:03}.pgm");
        save_pgm(&root.join(&rel), &img.grid)?;
        manifest.push_str(&format!("{rel},{label},{class_name}\n"));
    }
    let manifest_path = root.join("manifest.csv");
    fs::write(&manifest_path, manifest)?;
    Ok(manifest_path)
}

/// Loads a dataset from a directory holding `manifest.csv`.
pub fn load_dataset(root: &Path) -> Result<Dataset, DataError> {
    let manifest_path = root.join("manifest.csv");
    let text = fs::read_to_string(&manifest_path).map_err(|e| {
        DataError::Manifest(format!("cannot read {}: {e}", manifest_path.display()))
    })?;
    let mut lines = text.lines();
    match lines.next() {
        Some("path,label,class_name") => {}
        other => {
            return Err(DataError::Manifest(format!(
                "bad manifest header: {other:?}"
            )))
        }
    }
    let mut images = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let (path, label, class_name) = match (parts.next(), parts.next(), parts.next()) {
            (Some(p), Some(l), Some(c)) => (p, l, c),
            _ => {
                return Err(DataError::Manifest(format!(
                    "malformed manifest line {}",
                    lineno + 2
                )))
            }
        };
        let label: u32 = label
            .parse()
            .map_err(|_| DataError::Manifest(format!("bad label on line {}", lineno + 2)))?;
        while class_names.len() <= label as usize {
            class_names.push(String::new());
        }
        if class_names[label as usize].is_empty() {
            class_names[label as usize] = class_name.to_string();
        }
        let mut img = load_image(&root.join(path))?;
        img.label = Some(label);
        images.push(img);
    }
    if images.is_empty() {
        return Err(DataError::Manifest("manifest lists no images".into()));
    }
    Ok(Dataset {
        images,
        class_names,
        provenance: format!("loaded from {}", root.display()),
    })
}
