//! Linear multiclass head: one-vs-rest L2-regularized hinge loss trained by
//! seeded stochastic subgradient descent.

use crate::error::ClassifierError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Training hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct TrainParams {
    /// Regularization trade-off; λ = 1 / (C n).
    pub c: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            c: 1.0,
            max_epochs: 50,
            seed: 0,
        }
    }
}

/// One-vs-rest linear model: per-class weight row plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>, // num_classes x dim, row-major
    biases: Vec<f64>,
    classes: Vec<u32>,
    dim: usize,
}

impl LinearModel {
    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight_row(&self, class_index: usize) -> &[f64] {
        &self.weights[class_index * self.dim..(class_index + 1) * self.dim]
    }

    pub fn bias(&self, class_index: usize) -> f64 {
        self.biases[class_index]
    }

    /// Per-class decision scores w_c . x + b_c.
    pub fn scores(&self, feature: &[f32]) -> Result<Vec<f64>, ClassifierError> {
        if feature.len() != self.dim {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dim,
                got: feature.len(),
            });
        }
        Ok((0..self.classes.len())
            .map(|c| dot(self.weight_row(c), feature) + self.biases[c])
            .collect())
    }

    /// Predicted class label: argmax score, ties to the lowest class index.
    pub fn predict(&self, feature: &[f32]) -> Result<u32, ClassifierError> {
        let scores = self.scores(feature)?;
        let mut best = 0usize;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = i;
            }
        }
        Ok(self.classes[best])
    }

    /// Saves the model: magic "MNLM", version u8, u32 LE (classes, dims),
    /// then biases and weights as 64-bit floats.
    pub fn save(&self, path: &Path) -> Result<(), ClassifierError> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(b"MNLM")?;
        out.write_all(&[1u8])?;
        out.write_all(&(self.classes.len() as u32).to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        for b in &self.biases {
            out.write_all(&b.to_le_bytes())?;
        }
        for w in &self.weights {
            out.write_all(&w.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Loads a model saved by [`LinearModel::save`]; class labels are the
    /// canonical indices 0..classes-1 the toolchain uses throughout.
    pub fn load(path: &Path) -> Result<Self, ClassifierError> {
        let mut input = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != b"MNLM" {
            return Err(ClassifierError::CorruptModel("bad magic"));
        }
        let mut version = [0u8; 1];
        input.read_exact(&mut version)?;
        if version[0] != 1 {
            return Err(ClassifierError::CorruptModel("unsupported version"));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let classes = u32::from_le_bytes(word) as usize;
        input.read_exact(&mut word)?;
        let dim = u32::from_le_bytes(word) as usize;
        let mut buf = [0u8; 8];
        let mut biases = Vec::with_capacity(classes);
        for _ in 0..classes {
            input.read_exact(&mut buf)?;
            biases.push(f64::from_le_bytes(buf));
        }
        let mut weights = Vec::with_capacity(classes * dim);
        for _ in 0..classes * dim {
            input.read_exact(&mut buf)?;
            weights.push(f64::from_le_bytes(buf));
        }
        Ok(LinearModel {
            weights,
            biases,
            classes: (0..classes as u32).collect(),
            dim,
        })
    }
}

#[inline]
fn dot(w: &[f64], x: &[f32]) -> f64 {
    w.iter().zip(x).map(|(a, &b)| a * b as f64).sum()
}

/// Trains one binary hinge-loss subproblem with Pegasos-style steps:
/// learning rate 1/(λ t), λ = 1/(C n). The bias rides along as an
/// augmented constant feature, so it shares the shrink step.
fn train_binary(
    features: &[&[f32]],
    targets: &[f64],
    dim: usize,
    params: &TrainParams,
    epoch_orders: &[Vec<usize>],
) -> (Vec<f64>, f64) {
    let n = features.len();
    let lambda = 1.0 / (params.c * n as f64);
    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut t = 0usize;
    for order in epoch_orders {
        for &idx in order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = features[idx];
            let y = targets[idx];
            let margin = y * (dot(&w, x) + b);
            let shrink = 1.0 - eta * lambda;
            if margin < 1.0 {
                for (wi, &xi) in w.iter_mut().zip(x) {
                    *wi = *wi * shrink + eta * y * xi as f64;
                }
                b = b * shrink + eta * y;
            } else {
                for wi in w.iter_mut() {
                    *wi *= shrink;
                }
                b *= shrink;
            }
        }
    }
    (w, b)
}

/// Trains a one-vs-rest linear model; reproducible given (data order, seed).
pub fn train(
    features: &[&[f32]],
    labels: &[u32],
    params: &TrainParams,
) -> Result<LinearModel, ClassifierError> {
    if features.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    assert_eq!(features.len(), labels.len(), "features/labels length mismatch");
    let dim = features[0].len();
    for f in features {
        if f.len() != dim {
            return Err(ClassifierError::DimensionMismatch {
                expected: dim,
                got: f.len(),
            });
        }
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(ClassifierError::SingleClass(classes.len()));
    }

    // One shared sequence of seeded shuffles keeps subproblems aligned and
    // the whole run independent of how many run concurrently.
    let n = features.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let epoch_orders: Vec<Vec<usize>> = (0..params.max_epochs)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order
        })
        .collect();

    let per_class: Vec<(Vec<f64>, f64)> = classes
        .par_iter()
        .map(|&cls| {
            let targets: Vec<f64> = labels
                .iter()
                .map(|&l| if l == cls { 1.0 } else { -1.0 })
                .collect();
            train_binary(features, &targets, dim, params, &epoch_orders)
        })
        .collect();

    let mut weights = Vec::with_capacity(classes.len() * dim);
    let mut biases = Vec::with_capacity(classes.len());
    for (w, b) in per_class {
        weights.extend(w);
        biases.push(b);
    }
    Ok(LinearModel {
        weights,
        biases,
        classes,
        dim,
    })
}

/// Fraction of correct predictions over a labelled set.
pub fn accuracy(
    model: &LinearModel,
    features: &[&[f32]],
    labels: &[u32],
) -> Result<f64, ClassifierError> {
    if features.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    assert_eq!(features.len(), labels.len());
    let mut correct = 0usize;
    for (x, &y) in features.iter().zip(labels) {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / features.len() as f64)
}
