//! PCA filter learning: the learned-filter baseline that runs through the
//! same pipeline as the moment banks.

use crate::error::PcaError;
use crate::grid::Grid;
use crate::kernels::{BankFamily, KernelBank, OrderIndex};

/// Accumulated patch covariance (unnormalized second-moment matrix of
/// already-centered patches).
#[derive(Debug, Clone)]
pub struct PatchCovariance {
    matrix: Vec<f64>, // d x d, row-major
    dim: usize,
    sample_count: usize,
}

impl PatchCovariance {
    pub fn new(dim: usize) -> Self {
        PatchCovariance {
            matrix: vec![0.0; dim * dim],
            dim,
            sample_count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn accumulate(&mut self, patch: &[f64]) {
        assert_eq!(patch.len(), self.dim);
        for (i, &a) in patch.iter().enumerate() {
            let row = &mut self.matrix[i * self.dim..(i + 1) * self.dim];
            for (j, &b) in patch.iter().enumerate() {
                row[j] += a * b;
            }
        }
        self.sample_count += 1;
    }

    /// Merges a shard accumulated elsewhere (sharded over patches).
    pub fn merge(&mut self, other: &PatchCovariance) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.matrix.iter_mut().zip(&other.matrix) {
            *a += b;
        }
        self.sample_count += other.sample_count;
    }

    /// Mean outer product (divided by the sample count).
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.sample_count.max(1) as f64;
        self.matrix.iter().map(|v| v / n).collect()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; returns
/// (eigenvalues, eigenvectors as rows), sorted by descending eigenvalue.
pub fn jacobi_eigen(matrix: &[f64], dim: usize) -> (Vec<f64>, Vec<f64>) {
    const TOLERANCE: f64 = 1e-12;
    const MAX_SWEEPS: usize = 64;
    assert_eq!(matrix.len(), dim * dim);
    let mut a = matrix.to_vec();
    // v holds eigenvectors as columns during the iteration.
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let idx = |r: usize, c: usize| r * dim + c;
    let scale: f64 = matrix
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += a[idx(p, q)].abs();
            }
        }
        if off <= TOLERANCE * scale {
            break;
        }
        for p in 0..dim - 1 {
            for q in (p + 1)..dim {
                let apq = a[idx(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[idx(q, q)] - a[idx(p, p)]) / apq;
                let t = if theta.abs() > 1e154 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                a[idx(p, p)] = app - t * apq;
                a[idx(q, q)] = aqq + t * apq;
                a[idx(p, q)] = 0.0;
                a[idx(q, p)] = 0.0;
                for r in 0..dim {
                    if r != p && r != q {
                        let arp = a[idx(r, p)];
                        let arq = a[idx(r, q)];
                        a[idx(r, p)] = arp - s * (arq + tau * arp);
                        a[idx(r, q)] = arq + s * (arp - tau * arq);
                        a[idx(p, r)] = a[idx(r, p)];
                        a[idx(q, r)] = a[idx(r, q)];
                    }
                }
                for r in 0..dim {
                    let vrp = v[idx(r, p)];
                    let vrq = v[idx(r, q)];
                    v[idx(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[idx(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        a[idx(j, j)]
            .partial_cmp(&a[idx(i, i)])
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[idx(i, i)]).collect();
    let mut eigenvectors = vec![0.0; dim * dim];
    for (row, &col) in order.iter().enumerate() {
        for r in 0..dim {
            eigenvectors[row * dim + r] = v[idx(r, col)];
        }
    }
    (eigenvalues, eigenvectors)
}

/// Relative eigenvalue floor below which the covariance is treated as rank
/// deficient for filter extraction.
const RANK_TOLERANCE: f64 = 1e-13;

/// Learns the top-L PCA filters from centered patches and wraps them into a
/// [`KernelBank`] the pipeline consumes like any moment bank.
pub fn learn_pca_filters(
    patches: &[Grid<f64>],
    l: usize,
) -> Result<(KernelBank, Vec<f64>), PcaError> {
    if patches.is_empty() {
        return Err(PcaError::TooFewPatches { need: 1, got: 0 });
    }
    let rows = patches[0].rows();
    let cols = patches[0].cols();
    let dim = rows * cols;
    if l == 0 || l > dim {
        return Err(PcaError::TooManyFilters {
            requested: l,
            dim,
        });
    }
    if patches.len() < dim {
        return Err(PcaError::TooFewPatches {
            need: dim,
            got: patches.len(),
        });
    }
    let mut cov = PatchCovariance::new(dim);
    for (index, patch) in patches.iter().enumerate() {
        if patch.rows() != rows || patch.cols() != cols {
            return Err(PcaError::PatchShape { index });
        }
        cov.accumulate(patch.values());
    }
    learn_from_covariance(&cov, rows, cols, l)
}

/// Filter extraction from an already-accumulated covariance.
pub fn learn_from_covariance(
    cov: &PatchCovariance,
    rows: usize,
    cols: usize,
    l: usize,
) -> Result<(KernelBank, Vec<f64>), PcaError> {
    let dim = cov.dim();
    assert_eq!(dim, rows * cols);
    let (eigenvalues, eigenvectors) = jacobi_eigen(&cov.normalized(), dim);
    let lead = eigenvalues[0].max(0.0);
    if lead <= 0.0 || eigenvalues[l - 1] < lead * RANK_TOLERANCE {
        let rank = eigenvalues
            .iter()
            .filter(|&&e| e >= lead * RANK_TOLERANCE && e > 0.0)
            .count();
        return Err(PcaError::RankDeficient {
            rank,
            requested: l,
        });
    }
    let mut filters = Vec::with_capacity(l);
    for f in 0..l {
        let mut row = eigenvectors[f * dim..(f + 1) * dim].to_vec();
        // Sign convention: largest-magnitude component positive.
        let mut lead_idx = 0;
        for (i, v) in row.iter().enumerate() {
            if v.abs() > row[lead_idx].abs() {
                lead_idx = i;
            }
        }
        if row[lead_idx] < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
        filters.push(Grid::from_vec(rows, cols, row));
    }
    let orders = (0..l).map(|i| OrderIndex::new(i as u32, 0)).collect();
    let bank = KernelBank::from_real_filters(BankFamily::Pca, filters, orders, 1.0);
    Ok((bank, eigenvalues))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let (vals, vecs) = jacobi_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        // Eigenvector for 3 is (1,1)/sqrt(2) up to sign.
        let v = &vecs[0..2];
        assert!((v[0].abs() - (0.5f64).sqrt()).abs() < 1e-12);
        assert!((v[0] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn jacobi_diagonalizes_random_symmetric_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [3usize, 6, 10] {
            let mut m = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in i..dim {
                    let v = rng.random_range(-1.0..1.0);
                    m[i * dim + j] = v;
                    m[j * dim + i] = v;
                }
            }
            let (vals, vecs) = jacobi_eigen(&m, dim);
            // Check A v = λ v for every eigenpair.
            for e in 0..dim {
                let v = &vecs[e * dim..(e + 1) * dim];
                for i in 0..dim {
                    let av: f64 = (0..dim).map(|j| m[i * dim + j] * v[j]).sum();
                    assert!(
                        (av - vals[e] * v[i]).abs() < 1e-9,
                        "dim {dim}, pair {e}: residual {}",
                        (av - vals[e] * v[i]).abs()
                    );
                }
            }
            // Sorted descending.
            for w in vals.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
    }

    fn rank1_patches(noise: f64, count: usize) -> Vec<Grid<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base: Vec<f64> = (0..9).map(|i| ((i as f64) - 4.0) / 4.0).collect();
        (0..count)
            .map(|_| {
                let scale = rng.random_range(-1.0..1.0);
                let data = base
                    .iter()
                    .map(|&b| scale * b + rng.random_range(-noise..noise))
                    .collect();
                Grid::from_vec(3, 3, data)
            })
            .collect()
    }

    #[test]
    fn rank1_process_concentrates_first_eigenvalue() {
        let patches = rank1_patches(1e-6, 200);
        let (_, eigenvalues) = learn_pca_filters(&patches, 2).unwrap();
        let trace: f64 = eigenvalues.iter().map(|e| e.max(0.0)).sum();
        assert!(
            eigenvalues[0] / trace >= 0.99,
            "leading share {}",
            eigenvalues[0] / trace
        );
        // Eigenvalues are non-increasing and near-PSD.
        for w in eigenvalues.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        assert!(eigenvalues.iter().all(|&e| e >= -1e-8));
    }

    #[test]
    fn filters_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let patches: Vec<Grid<f64>> = (0..100)
            .map(|_| {
                let data = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
                Grid::from_vec(4, 4, data)
            })
            .collect();
        let (bank, _) = learn_pca_filters(&patches, 16).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let dot: f64 = bank
                    .filter(i)
                    .values()
                    .iter()
                    .zip(bank.filter(j).values())
                    .map(|(a, b)| a.re * b.re)
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-8, "({i},{j}): {dot}");
            }
        }
    }

    #[test]
    fn complete_basis_reconstructs_patches() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let patches: Vec<Grid<f64>> = (0..80)
            .map(|_| {
                let data = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
                Grid::from_vec(3, 3, data)
            })
            .collect();
        let (bank, _) = learn_pca_filters(&patches, 9).unwrap();
        for patch in patches.iter().take(10) {
            let mut reconstructed = vec![0.0f64; 9];
            for f in 0..9 {
                let coeff: f64 = bank
                    .filter(f)
                    .values()
                    .iter()
                    .zip(patch.values())
                    .map(|(a, &b)| a.re * b)
                    .sum();
                for (r, fv) in reconstructed.iter_mut().zip(bank.filter(f).values()) {
                    *r += coeff * fv.re;
                }
            }
            for (r, &p) in reconstructed.iter().zip(patch.values()) {
                assert!((r - p).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sign_convention_makes_leading_component_positive() {
        let patches = rank1_patches(1e-4, 100);
        let (bank, _) = learn_pca_filters(&patches, 1).unwrap();
        let filter = bank.filter(0);
        let lead = filter
            .values()
            .iter()
            .map(|v| v.re)
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        assert!(lead > 0.0);
    }

    #[test]
    fn degenerate_covariance_is_a_capacity_error() {
        let patches: Vec<Grid<f64>> = (0..20).map(|_| Grid::zeros(2, 2)).collect();
        assert!(matches!(
            learn_pca_filters(&patches, 2),
            Err(PcaError::RankDeficient { .. })
        ));
    }

    #[test]
    fn preconditions_are_enforced() {
        let patches: Vec<Grid<f64>> = (0..3).map(|_| Grid::zeros(2, 2)).collect();
        assert!(matches!(
            learn_pca_filters(&patches, 2),
            Err(PcaError::TooFewPatches { .. })
        ));
        let enough: Vec<Grid<f64>> = (0..8).map(|_| Grid::zeros(2, 2)).collect();
        assert!(matches!(
            learn_pca_filters(&enough, 5),
            Err(PcaError::TooManyFilters { .. })
        ));
    }

    #[test]
    fn covariance_sharding_merges_cleanly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let patches: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mut whole = PatchCovariance::new(4);
        for p in &patches {
            whole.accumulate(p);
        }
        let mut shard_a = PatchCovariance::new(4);
        let mut shard_b = PatchCovariance::new(4);
        for (i, p) in patches.iter().enumerate() {
            if i % 2 == 0 {
                shard_a.accumulate(p);
            } else {
                shard_b.accumulate(p);
            }
        }
        shard_a.merge(&shard_b);
        assert_eq!(shard_a.sample_count(), whole.sample_count());
        for (a, b) in shard_a.normalized().iter().zip(whole.normalized()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
