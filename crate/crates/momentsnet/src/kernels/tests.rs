use super::*;
use crate::grid::Grid;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Independent projection oracle: explicit double loop, no iterator fusion.
fn project_oracle(patch: &Grid<f64>, bank: &KernelBank) -> Vec<f64> {
    let mut out = Vec::new();
    for idx in 0..bank.len() {
        let filter = bank.filter(idx);
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..patch.rows() {
            for j in 0..patch.cols() {
                let f = filter.get(i, j);
                let p = *patch.get(i, j);
                re += f.re * p;
                im += f.im * p;
            }
        }
        re *= bank.cell_area();
        im *= bank.cell_area();
        let v = if bank.family().is_complex() {
            (re * re + im * im).sqrt()
        } else {
            re
        };
        out.push(v);
    }
    out
}

/// Exhaustive enumeration oracle: list every valid pair up to a generous
/// total, sort with the canonical comparator, take the prefix.
fn enumerate_oracle(family: &MomentFamily, l: usize) -> Vec<OrderIndex> {
    let max_total = 4 * l as u32 + 8;
    let mut all = Vec::new();
    for n in 0..=max_total {
        let m_range: Vec<i32> = if family.is_circular() {
            (-(max_total as i32)..=max_total as i32).collect()
        } else {
            (0..=max_total as i32).collect()
        };
        for m in m_range {
            if family.order_is_valid(n, m) && n + m.unsigned_abs() <= max_total {
                all.push(OrderIndex::new(n, m));
            }
        }
    }
    all.sort_by_key(|o| (o.total(), o.n, o.m));
    all.truncate(l);
    all
}

fn random_patch(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Grid<f64> {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    Grid::from_vec(rows, cols, data)
}

#[test]
fn enumerate_geometric_first_three() {
    let got = enumerate_orders(&MomentFamily::Geometric, 3);
    assert_eq!(
        got,
        vec![
            OrderIndex::new(0, 0),
            OrderIndex::new(0, 1),
            OrderIndex::new(1, 0)
        ]
    );
}

#[test]
fn enumerate_pst_starts_at_n1() {
    let got = enumerate_orders(&MomentFamily::Pst, 2);
    assert_eq!(got, vec![OrderIndex::new(1, 0), OrderIndex::new(1, -1)]);
}

#[test]
fn enumerate_zernike_prefix_matches_exhaustive_oracle() {
    // Canonical order: ascending n+|m|, ties by n then m. The first four
    // Zernike pairs are (0,0), (1,-1), (1,1), (2,0).
    let got = enumerate_orders(&MomentFamily::Zernike, 4);
    assert_eq!(got, enumerate_oracle(&MomentFamily::Zernike, 4));
    assert_eq!(
        got,
        vec![
            OrderIndex::new(0, 0),
            OrderIndex::new(1, -1),
            OrderIndex::new(1, 1),
            OrderIndex::new(2, 0)
        ]
    );
}

#[test]
fn enumerate_matches_oracle_for_all_families() {
    for family in MomentFamily::all_default() {
        let got = enumerate_orders(&family, 25);
        let expected = enumerate_oracle(&family, 25);
        assert_eq!(got, expected, "family {family}");
    }
}

proptest! {
    #[test]
    fn enumerate_is_prefix_stable(fam_idx in 0usize..12, l in 1usize..40) {
        let family = MomentFamily::all_default()[fam_idx].clone();
        let short = enumerate_orders(&family, l);
        let long = enumerate_orders(&family, l + 1);
        prop_assert_eq!(short.as_slice(), &long[..l]);
    }
}

#[test]
fn geometric_single_filter_is_all_ones() {
    let bank = build_kernel_bank(&MomentFamily::Geometric, 3, 3, 1).unwrap();
    for v in bank.filter(0).values() {
        assert_eq!(*v, num_complex::Complex64::new(1.0, 0.0));
    }
    assert!((bank.cell_area() - 4.0 / 9.0).abs() < 1e-15);
}

#[test]
fn tchebichef_capacity_is_grid_size() {
    assert!(build_kernel_bank(&MomentFamily::Tchebichef, 4, 4, 16).is_ok());
    let err = build_kernel_bank(&MomentFamily::Tchebichef, 4, 4, 17).unwrap_err();
    assert!(matches!(err, KernelError::Capacity { available: 16, .. }));
}

#[test]
fn zernike_piston_filter_is_inverse_pi_inside_disk() {
    let k = 11;
    let bank = build_kernel_bank(&MomentFamily::Zernike, k, k, 10).unwrap();
    let filter = bank.filter(0); // order (0,0)
    assert_eq!(bank.orders()[0], OrderIndex::new(0, 0));
    let inv_pi = 1.0 / std::f64::consts::PI;
    for i in 0..k {
        let y = (2 * i + 1) as f64 / k as f64 - 1.0;
        for j in 0..k {
            let x = (2 * j + 1) as f64 / k as f64 - 1.0;
            let v = filter.get(i, j);
            if x.hypot(y) > 1.0 {
                assert_eq!(*v, num_complex::Complex64::new(0.0, 0.0));
            } else {
                assert!((v.re - inv_pi).abs() < 1e-14 && v.im.abs() < 1e-14);
            }
        }
    }
}

#[test]
fn circular_banks_vanish_outside_disk() {
    for family in MomentFamily::all_default() {
        if !family.is_circular() {
            continue;
        }
        let k = 6;
        let bank = build_kernel_bank(&family, k, k, 8).unwrap();
        for idx in 0..bank.len() {
            let filter = bank.filter(idx);
            for i in 0..k {
                let y = (2 * i + 1) as f64 / k as f64 - 1.0;
                for j in 0..k {
                    let x = (2 * j + 1) as f64 / k as f64 - 1.0;
                    if x.hypot(y) > 1.0 {
                        assert_eq!(
                            *filter.get(i, j),
                            num_complex::Complex64::new(0.0, 0.0),
                            "family {family}, filter {idx}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn bank_entries_are_finite_for_all_families() {
    for family in MomentFamily::all_default() {
        for &(k1, k2) in &[(4usize, 4usize), (5, 7), (8, 8)] {
            let bank = build_kernel_bank(&family, k1, k2, 9).unwrap();
            for idx in 0..bank.len() {
                for v in bank.filter(idx).values() {
                    assert!(v.re.is_finite() && v.im.is_finite(), "family {family}");
                }
            }
        }
    }
}

#[test]
fn gpht_center_pixel_is_zero_for_small_s_on_odd_grid() {
    // Odd grids place a sample exactly at r = 0 where the s < 2 weight blows up.
    let bank = build_kernel_bank(&MomentFamily::Gpcet { s: 1.0 }, 5, 5, 4).unwrap();
    for idx in 0..bank.len() {
        let v = bank.filter(idx).get(2, 2);
        assert_eq!(*v, num_complex::Complex64::new(0.0, 0.0));
        assert!(v.re.is_finite());
    }
}

#[test]
fn projection_of_zero_patch_is_zero() {
    let bank = build_kernel_bank(&MomentFamily::Zernike, 5, 5, 6).unwrap();
    let patch = Grid::zeros(5, 5);
    let out = moment_project(&patch, &bank).unwrap();
    assert!(out.iter().all(|&v| v == 0.0));
}

#[test]
fn projection_shape_mismatch_errors() {
    let bank = build_kernel_bank(&MomentFamily::Legendre, 5, 5, 3).unwrap();
    let patch = Grid::zeros(4, 5);
    assert!(matches!(
        moment_project(&patch, &bank),
        Err(KernelError::ShapeMismatch { .. })
    ));
}

#[test]
fn projection_matches_brute_force_oracle_for_all_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for family in MomentFamily::all_default() {
        for _ in 0..10 {
            let k1 = rng.random_range(4..=8);
            let k2 = rng.random_range(4..=8);
            let l = rng.random_range(1..=9);
            let bank = build_kernel_bank(&family, k1, k2, l).unwrap();
            let patch = random_patch(&mut rng, k1, k2);
            let got = moment_project(&patch, &bank).unwrap();
            let expected = project_oracle(&patch, &bank);
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).abs() <= 1e-12, "family {family}: {g} vs {e}");
            }
        }
    }
}

#[test]
fn real_part_reduction_is_configurable() {
    let bank = build_kernel_bank(&MomentFamily::Pcet, 5, 5, 4)
        .unwrap()
        .with_reduction(ComplexReduction::RealPart);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let patch = random_patch(&mut rng, 5, 5);
    let real_parts = moment_project(&patch, &bank).unwrap();
    // Real parts may be negative; moduli never are.
    let moduli =
        moment_project(&patch, &bank.clone().with_reduction(ComplexReduction::Modulus)).unwrap();
    for (r, m) in real_parts.iter().zip(&moduli) {
        assert!(r.abs() <= m + 1e-12);
    }
}

/// Reconstructs a patch from its complete set of discrete moments using the
/// inverse expansion implied by orthogonality.
fn reconstruct_discrete(patch: &Grid<f64>, family: &MomentFamily) -> Grid<f64> {
    let k = patch.rows();
    let bank = build_kernel_bank(family, k, k, k * k).unwrap();
    let moments = moment_project(patch, &bank).unwrap();
    let mut out = Grid::zeros(k, k);
    for (idx, ord) in bank.orders().iter().enumerate() {
        let coeff = moments[idx];
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
                    _ => unreachable!(),
                };
                let v = *out.get(i, j) + coeff * basis;
                out.set(i, j, v);
            }
        }
    }
    out
}

#[test]
fn complete_discrete_moments_reconstruct_patches() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for family in [MomentFamily::Tchebichef, MomentFamily::krawtchouk_default()] {
        for _ in 0..3 {
            let patch = random_patch(&mut rng, 8, 8);
            let rec = reconstruct_discrete(&patch, &family);
            let max_err = patch
                .values()
                .iter()
                .zip(rec.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_err <= 1e-6, "family {family}: max err {max_err}");
        }
    }
}

#[test]
fn zernike_modulus_is_stable_under_quarter_rotation() {
    // Disk-supported patch: zero outside the inscribed disk.
    let k = 11;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut patch = Grid::zeros(k, k);
    for i in 0..k {
        let y = (2 * i + 1) as f64 / k as f64 - 1.0;
        for j in 0..k {
            let x = (2 * j + 1) as f64 / k as f64 - 1.0;
            if x.hypot(y) <= 1.0 {
                patch.set(i, j, rng.random_range(0.0..1.0));
            }
        }
    }
    let bank = build_kernel_bank(&MomentFamily::Zernike, k, k, 10).unwrap();
    let base = moment_project(&patch, &bank).unwrap();
    let rotated = patch.rotated_90_cw();
    let turned = moment_project(&rotated, &bank).unwrap();
    for (idx, (a, b)) in base.iter().zip(&turned).enumerate() {
        let rel = (a - b).abs() / a.abs().max(1e-12);
        assert!(rel < 0.05, "order {:?}: {a} vs {b}", bank.orders()[idx]);
    }
}

#[test]
fn filter_text_export_round_trips() {
    let bank = build_kernel_bank(&MomentFamily::Legendre, 4, 5, 3).unwrap();
    let mut buf = Vec::new();
    bank.write_filter_text(2, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|line| line.split(' ').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 5));
    for i in 0..4 {
        for j in 0..5 {
            assert!((rows[i][j] - bank.filter(2).get(i, j).re).abs() < 1e-10);
        }
    }
}

#[test]
fn family_parse_round_trips() {
    for family in MomentFamily::all_default() {
        let parsed = MomentFamily::parse(family.name()).unwrap();
        assert_eq!(parsed.name(), family.name());
    }
    assert!(MomentFamily::parse("unknown").is_none());
}
