//! Numerical self-checks over the kernel families: orthonormality Gram
//! matrices, recurrence consistency, radial identities and moment-set
//! reconstruction. The CLI surfaces these as a pass/fail report.

use crate::grid::Grid;
use crate::kernels::{
    build_kernel_bank, dual_hahn_weighted, krawtchouk_weighted, legendre_poly, moment_project,
    tchebichef_norm, tchebichef_poly, zernike_radial, MomentFamily,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// Knobs for deliberately breaking a check; used to prove the report
/// machinery actually detects failures.
#[derive(Debug, Clone, Copy)]
pub struct SelfcheckOptions {
    /// Multiplies the Tchebichef squared norm inside the orthonormality
    /// check; anything but 1.0 must trip the check.
    pub tchebichef_norm_scale: f64,
}

impl Default for SelfcheckOptions {
    fn default() -> Self {
        SelfcheckOptions {
            tchebichef_norm_scale: 1.0,
        }
    }
}

const GRID_SIZES: [u32; 4] = [4, 8, 11, 15];

fn gram_deviation(points: u32, eval: impl Fn(u32, u32) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for n in 0..points {
        for m in 0..points {
            let mut acc = 0.0;
            for x in 0..points {
                acc += eval(n, x) * eval(m, x);
            }
            let expected = if n == m { 1.0 } else { 0.0 };
            worst = worst.max((acc - expected).abs());
        }
    }
    worst
}

/// Max |Gram - I| entry for normalized Tchebichef polynomials, N ≤ 15.
pub fn tchebichef_orthonormality(norm_scale: f64) -> f64 {
    let mut worst = 0.0f64;
    for &points in &GRID_SIZES {
        let dev = gram_deviation(points, |n, x| {
            let rho = tchebichef_norm(n, points).unwrap() * norm_scale;
            tchebichef_poly(n, x, points).unwrap() / rho.sqrt()
        });
        worst = worst.max(dev);
    }
    worst
}

/// Max |Gram - I| entry for weighted Krawtchouk polynomials at p = 0.5.
pub fn krawtchouk_orthonormality() -> f64 {
    let mut worst = 0.0f64;
    for &points in &GRID_SIZES {
        let dev = gram_deviation(points, |n, x| {
            krawtchouk_weighted(n, x, 0.5, points - 1).unwrap()
        });
        worst = worst.max(dev);
    }
    worst
}

/// Max |Gram - I| entry for weighted dual Hahn polynomials at a = c = 0.
pub fn dual_hahn_orthonormality() -> f64 {
    let mut worst = 0.0f64;
    for &points in &GRID_SIZES {
        let b = points as f64;
        let dev = gram_deviation(points, |n, x| {
            dual_hahn_weighted(n, x as f64, 0.0, b, 0.0).unwrap()
        });
        worst = worst.max(dev);
    }
    worst
}

/// Max residual of (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1} for n ≤ 12.
pub fn legendre_recurrence_residual() -> f64 {
    let mut worst = 0.0f64;
    for n in 1..=12u32 {
        for i in 0..20 {
            let x = -0.95 + i as f64 * 0.1;
            let lhs = (n + 1) as f64 * legendre_poly(n + 1, x);
            let rhs =
                (2 * n + 1) as f64 * x * legendre_poly(n, x) - n as f64 * legendre_poly(n - 1, x);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// Max deviation of E_nn(r) from r^n and E_n|m|(1) from 1, n ≤ 10.
pub fn zernike_identity_deviation() -> f64 {
    let mut worst = 0.0f64;
    for n in 0..=10u32 {
        for i in 0..=20 {
            let r = i as f64 / 20.0;
            worst = worst.max((zernike_radial(n, n, r).unwrap() - r.powi(n as i32)).abs());
        }
        for m in (n % 2..=n).step_by(2) {
            worst = worst.max((zernike_radial(n, m, 1.0).unwrap() - 1.0).abs());
        }
    }
    worst
}

/// Max reconstruction error of random 8x8 patches from their complete
/// moment set (Tchebichef or Krawtchouk).
pub fn reconstruction_error(family: &MomentFamily) -> f64 {
    let k = 8usize;
    let bank = build_kernel_bank(family, k, k, k * k).expect("complete bank");
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let data: Vec<f64> = (0..k * k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let patch = Grid::from_vec(k, k, data);
        let moments = moment_project(&patch, &bank).unwrap();
        let mut rec = vec![0.0f64; k * k];
        for (idx, ord) in bank.orders().iter().enumerate() {
            for i in 0..k {
                for j in 0..k {
                    let basis = match family {
                        MomentFamily::Tchebichef => {
                            tchebichef_poly(ord.n, i as u32, k as u32).unwrap()
                                * tchebichef_poly(ord.m as u32, j as u32, k as u32).unwrap()
                        }
                        MomentFamily::Krawtchouk { p1, p2 } => {
                            krawtchouk_weighted(ord.n, i as u32, *p1, k as u32 - 1).unwrap()
                                * krawtchouk_weighted(ord.m as u32, j as u32, *p2, k as u32 - 1)
                                    .unwrap()
                        }
                        _ => panic!("reconstruction check covers discrete families"),
                    };
                    rec[i * k + j] += moments[idx] * basis;
                }
            }
        }
        for (r, p) in rec.iter().zip(patch.values()) {
            worst = worst.max((r - p).abs());
        }
    }
    worst
}

/// Runs the full suite and reports every check.
pub fn run_selfchecks(options: &SelfcheckOptions) -> Vec<CheckReport> {
    vec![
        CheckReport {
            name: "tchebichef_orthonormality",
            max_deviation: tchebichef_orthonormality(options.tchebichef_norm_scale),
            tolerance: 1e-8,
        },
        CheckReport {
            name: "krawtchouk_orthonormality",
            max_deviation: krawtchouk_orthonormality(),
            tolerance: 1e-8,
        },
        CheckReport {
            name: "dual_hahn_orthonormality",
            max_deviation: dual_hahn_orthonormality(),
            tolerance: 1e-8,
        },
        CheckReport {
            name: "legendre_recurrence",
            max_deviation: legendre_recurrence_residual(),
            tolerance: 1e-10,
        },
        CheckReport {
            name: "zernike_identities",
            max_deviation: zernike_identity_deviation(),
            tolerance: 1e-9,
        },
        CheckReport {
            name: "tchebichef_reconstruction",
            max_deviation: reconstruction_error(&MomentFamily::Tchebichef),
            tolerance: 1e-6,
        },
        CheckReport {
            name: "krawtchouk_reconstruction",
            max_deviation: reconstruction_error(&MomentFamily::krawtchouk_default()),
            tolerance: 1e-6,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes_every_check() {
        let reports = run_selfchecks(&SelfcheckOptions::default());
        assert_eq!(reports.len(), 7);
        for report in &reports {
            assert!(
                report.passed(),
                "{} deviated by {} (tolerance {})",
                report.name,
                report.max_deviation,
                report.tolerance
            );
        }
    }

    #[test]
    fn perturbed_norm_fails_the_named_check_only() {
        let reports = run_selfchecks(&SelfcheckOptions {
            tchebichef_norm_scale: 1.0 + 1e-4,
        });
        for report in &reports {
            if report.name == "tchebichef_orthonormality" {
                assert!(!report.passed(), "perturbation went undetected");
            } else {
                assert!(report.passed(), "{} should be unaffected", report.name);
            }
        }
    }

    #[test]
    fn orthonormality_deviation_is_tiny() {
        assert!(tchebichef_orthonormality(1.0) <= 1e-8);
        assert!(krawtchouk_orthonormality() <= 1e-8);
        assert!(dual_hahn_orthonormality() <= 1e-8);
    }
}
