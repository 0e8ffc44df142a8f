//! Moment kernel families and sampled filter banks.
//!
//! Twelve classical moment bases (geometric, Legendre, Zernike, Tchebichef,
//! Krawtchouk, dual Hahn, and the polar/generic polar harmonic transforms)
//! are evaluated on a patch grid and packed into [`KernelBank`]s that the
//! network stages consume. Continuous Cartesian families are sampled on
//! [-1,1]², disk families on the inscribed unit disk, and discrete families
//! directly on the pixel lattice.

mod dual_hahn;
mod harmonic;
mod krawtchouk;
mod legendre;
pub(crate) mod special;
mod tchebichef;
mod zernike;

pub use dual_hahn::{check_dual_hahn_params, dual_hahn_poly, dual_hahn_weighted};
pub use harmonic::{gpht_radial, pht_radial, PolarVariant};
pub use krawtchouk::{krawtchouk_poly, krawtchouk_sq_norm, krawtchouk_weight, krawtchouk_weighted};
pub use legendre::legendre_poly;
pub use tchebichef::{tchebichef_norm, tchebichef_poly};
pub use zernike::zernike_radial;

use crate::error::KernelError;
use crate::grid::Grid;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

/// One of the twelve moment kernel families, with its family parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentFamily {
    Geometric,
    Legendre,
    Zernike,
    Tchebichef,
    Krawtchouk { p1: f64, p2: f64 },
    DualHahn { a: f64, c: f64 },
    Pcet,
    Pct,
    Pst,
    Gpcet { s: f64 },
    Gpct { s: f64 },
    Gpst { s: f64 },
}

impl MomentFamily {
    pub fn krawtchouk_default() -> Self {
        MomentFamily::Krawtchouk { p1: 0.5, p2: 0.5 }
    }

    pub fn dual_hahn_default() -> Self {
        MomentFamily::DualHahn { a: 0.0, c: 0.0 }
    }

    /// Parses a family name as used by config files and the CLI.
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "geometric" => MomentFamily::Geometric,
            "legendre" => MomentFamily::Legendre,
            "zernike" => MomentFamily::Zernike,
            "tchebichef" => MomentFamily::Tchebichef,
            "krawtchouk" => MomentFamily::krawtchouk_default(),
            "dualhahn" | "dual_hahn" => MomentFamily::dual_hahn_default(),
            "pcet" => MomentFamily::Pcet,
            "pct" => MomentFamily::Pct,
            "pst" => MomentFamily::Pst,
            "gpcet" => MomentFamily::Gpcet { s: 2.0 },
            "gpct" => MomentFamily::Gpct { s: 2.0 },
            "gpst" => MomentFamily::Gpst { s: 2.0 },
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MomentFamily::Geometric => "geometric",
            MomentFamily::Legendre => "legendre",
            MomentFamily::Zernike => "zernike",
            MomentFamily::Tchebichef => "tchebichef",
            MomentFamily::Krawtchouk { .. } => "krawtchouk",
            MomentFamily::DualHahn { .. } => "dualhahn",
            MomentFamily::Pcet => "pcet",
            MomentFamily::Pct => "pct",
            MomentFamily::Pst => "pst",
            MomentFamily::Gpcet { .. } => "gpcet",
            MomentFamily::Gpct { .. } => "gpct",
            MomentFamily::Gpst { .. } => "gpst",
        }
    }

    /// All twelve families with default parameters.
    pub fn all_default() -> Vec<MomentFamily> {
        vec![
            MomentFamily::Geometric,
            MomentFamily::Legendre,
            MomentFamily::Zernike,
            MomentFamily::Tchebichef,
            MomentFamily::krawtchouk_default(),
            MomentFamily::dual_hahn_default(),
            MomentFamily::Pcet,
            MomentFamily::Pct,
            MomentFamily::Pst,
            MomentFamily::Gpcet { s: 2.0 },
            MomentFamily::Gpct { s: 2.0 },
            MomentFamily::Gpst { s: 2.0 },
        ]
    }

    /// Whether the sampled kernels take complex values.
    pub fn is_complex(&self) -> bool {
        matches!(
            self,
            MomentFamily::Zernike
                | MomentFamily::Pcet
                | MomentFamily::Pct
                | MomentFamily::Pst
                | MomentFamily::Gpcet { .. }
                | MomentFamily::Gpct { .. }
                | MomentFamily::Gpst { .. }
        )
    }

    /// Whether the kernels live on the unit disk (signed angular order m).
    pub fn is_circular(&self) -> bool {
        self.is_complex()
    }

    /// Whether the kernels live on the integer pixel lattice.
    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            MomentFamily::Tchebichef | MomentFamily::Krawtchouk { .. } | MomentFamily::DualHahn { .. }
        )
    }

    fn min_n(&self) -> u32 {
        match self {
            MomentFamily::Pst | MomentFamily::Gpst { .. } => 1,
            _ => 0,
        }
    }

    fn validate_params(&self) -> Result<(), KernelError> {
        match self {
            MomentFamily::Krawtchouk { p1, p2 } => {
                for (name, p) in [("p1", *p1), ("p2", *p2)] {
                    if !(p > 0.0 && p < 1.0) {
                        return Err(KernelError::InvalidParameter {
                            name: if name == "p1" { "p1" } else { "p2" },
                            value: p,
                            reason: "must lie strictly inside (0,1)",
                        });
                    }
                }
                Ok(())
            }
            MomentFamily::DualHahn { a, c } => {
                // Full constraints need the lattice size; b is checked at bank build.
                if !(*a > -0.5) {
                    return Err(KernelError::InvalidParameter {
                        name: "a",
                        value: *a,
                        reason: "requires a > -1/2",
                    });
                }
                if !(*c < 1.0 + *a) {
                    return Err(KernelError::InvalidParameter {
                        name: "c",
                        value: *c,
                        reason: "requires c < 1 + a",
                    });
                }
                Ok(())
            }
            MomentFamily::Gpcet { s } | MomentFamily::Gpct { s } | MomentFamily::Gpst { s } => {
                if !(*s > 0.0) {
                    return Err(KernelError::InvalidParameter {
                        name: "s",
                        value: *s,
                        reason: "must be strictly positive",
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether (n, m) indexes a basis function of this family.
    pub fn order_is_valid(&self, n: u32, m: i32) -> bool {
        if n < self.min_n() {
            return false;
        }
        if self.is_circular() {
            if let MomentFamily::Zernike = self {
                let m_abs = m.unsigned_abs();
                m_abs <= n && (n - m_abs) % 2 == 0
            } else {
                true
            }
        } else {
            m >= 0
        }
    }
}

impl fmt::Display for MomentFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A (radial/x order n, angular/y order m) pair; m is signed only for
/// circular families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderIndex {
    pub n: u32,
    pub m: i32,
}

impl OrderIndex {
    pub fn new(n: u32, m: i32) -> Self {
        OrderIndex { n, m }
    }

    pub fn total(&self) -> u32 {
        self.n + self.m.unsigned_abs()
    }
}

/// What produced a bank's filters: a moment family or learned PCA filters.
#[derive(Debug, Clone, PartialEq)]
pub enum BankFamily {
    Moment(MomentFamily),
    Pca,
}

impl BankFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BankFamily::Moment(f) => f.name(),
            BankFamily::Pca => "pca",
        }
    }

    pub fn is_complex(&self) -> bool {
        match self {
            BankFamily::Moment(f) => f.is_complex(),
            BankFamily::Pca => false,
        }
    }
}

/// How a complex projection collapses to a real feature value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexReduction {
    /// |z| — the default; magnitudes are nonnegative and rotation-friendly.
    Modulus,
    /// Re(z) — kept as a configurable alternative.
    RealPart,
}

/// An ordered set of L sampled filters over a k1 x k2 patch grid.
#[derive(Debug, Clone)]
pub struct KernelBank {
    family: BankFamily,
    rows: usize,
    cols: usize,
    filters: Vec<Grid<Complex64>>,
    orders: Vec<OrderIndex>,
    cell_area: f64,
    reduction: ComplexReduction,
}

impl KernelBank {
    pub fn family(&self) -> &BankFamily {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }

    pub fn orders(&self) -> &[OrderIndex] {
        &self.orders
    }

    pub fn filter(&self, index: usize) -> &Grid<Complex64> {
        &self.filters[index]
    }

    pub fn reduction(&self) -> ComplexReduction {
        self.reduction
    }

    pub fn with_reduction(mut self, reduction: ComplexReduction) -> Self {
        self.reduction = reduction;
        self
    }

    /// Assembles a bank from real-valued filters (used by PCA learning).
    pub fn from_real_filters(
        family: BankFamily,
        filters: Vec<Grid<f64>>,
        orders: Vec<OrderIndex>,
        cell_area: f64,
    ) -> Self {
        assert_eq!(filters.len(), orders.len());
        assert!(!filters.is_empty());
        let rows = filters[0].rows();
        let cols = filters[0].cols();
        let filters = filters
            .into_iter()
            .map(|g| {
                let data = g.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
                Grid::from_vec(g.rows(), g.cols(), data)
            })
            .collect();
        KernelBank {
            family,
            rows,
            cols,
            filters,
            orders,
            cell_area,
            reduction: ComplexReduction::Modulus,
        }
    }

    /// Reorders filters (and their orders) by `perm`; test support for
    /// permutation-invariance properties.
    #[cfg(test)]
    pub(crate) fn permuted(&self, perm: &[usize]) -> KernelBank {
        assert_eq!(perm.len(), self.filters.len());
        let filters = perm.iter().map(|&i| self.filters[i].clone()).collect();
        let orders = perm.iter().map(|&i| self.orders[i]).collect();
        KernelBank {
            family: self.family.clone(),
            rows: self.rows,
            cols: self.cols,
            filters,
            orders,
            cell_area: self.cell_area,
            reduction: self.reduction,
        }
    }

    /// Writes filter `index` as a plain-text matrix, one row per line.
    /// Real banks emit one number per entry; complex banks emit `re:im`.
    pub fn write_filter_text(&self, index: usize, out: &mut impl Write) -> std::io::Result<()> {
        let f = &self.filters[index];
        for r in 0..f.rows() {
            let mut line = String::new();
            for c in 0..f.cols() {
                if c > 0 {
                    line.push(' ');
                }
                let v = f.get(r, c);
                if self.family.is_complex() {
                    line.push_str(&format!("{:.12e}:{:.12e}", v.re, v.im));
                } else {
                    line.push_str(&format!("{:.12e}", v.re));
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Enumerates the first `l` valid (n, m) pairs in canonical order:
/// ascending total n + |m|, ties broken by ascending n, then ascending m.
pub fn enumerate_orders(family: &MomentFamily, l: usize) -> Vec<OrderIndex> {
    enumerate_orders_capped(family, l, None)
}

/// Same canonical enumeration, restricted to n < cap.0 and (for Cartesian
/// families) m < cap.1; may return fewer than `l` pairs when the caps
/// exhaust the family.
pub(crate) fn enumerate_orders_capped(
    family: &MomentFamily,
    l: usize,
    cap: Option<(u32, u32)>,
) -> Vec<OrderIndex> {
    let mut out = Vec::with_capacity(l);
    if l == 0 {
        return out;
    }
    let max_total = match cap {
        Some((cn, cm)) => (cn - 1) + (cm - 1),
        None => (4 * l as u32).max(8),
    };
    'totals: for total in 0..=max_total {
        for n in 0..=total {
            let rest = total - n;
            if family.is_circular() {
                let candidates: &[i32] = if rest == 0 {
                    &[0]
                } else {
                    &[-(rest as i32), rest as i32]
                };
                for &m in candidates {
                    if !family.order_is_valid(n, m) {
                        continue;
                    }
                    if let Some((cn, _)) = cap {
                        if n >= cn {
                            continue;
                        }
                    }
                    out.push(OrderIndex::new(n, m));
                    if out.len() == l {
                        break 'totals;
                    }
                }
            } else {
                let m = rest as i32;
                if !family.order_is_valid(n, m) {
                    continue;
                }
                if let Some((cn, cm)) = cap {
                    if n >= cn || rest >= cm {
                        continue;
                    }
                }
                out.push(OrderIndex::new(n, m));
                if out.len() == l {
                    break 'totals;
                }
            }
        }
    }
    out
}

/// Midpoint sample of cell i out of k, affinely mapped into [-1, 1].
#[inline]
fn midpoint_coord(i: usize, k: usize) -> f64 {
    (2 * i + 1) as f64 / k as f64 - 1.0
}

fn sample_cartesian(
    k1: usize,
    k2: usize,
    mut kernel: impl FnMut(f64, f64) -> f64,
) -> Grid<Complex64> {
    let mut data = Vec::with_capacity(k1 * k2);
    for i in 0..k1 {
        let x = midpoint_coord(i, k1);
        for j in 0..k2 {
            let y = midpoint_coord(j, k2);
            data.push(Complex64::new(kernel(x, y), 0.0));
        }
    }
    Grid::from_vec(k1, k2, data)
}

fn sample_disk(
    k1: usize,
    k2: usize,
    mut kernel: impl FnMut(f64, f64) -> Complex64,
) -> Grid<Complex64> {
    let mut data = Vec::with_capacity(k1 * k2);
    for i in 0..k1 {
        let y = midpoint_coord(i, k1);
        for j in 0..k2 {
            let x = midpoint_coord(j, k2);
            let r = x.hypot(y);
            if r > 1.0 {
                data.push(Complex64::new(0.0, 0.0));
            } else {
                data.push(kernel(r, y.atan2(x)));
            }
        }
    }
    Grid::from_vec(k1, k2, data)
}

fn angular(m: i32, theta: f64) -> Complex64 {
    // Conjugated harmonic e^{-im θ}, as the kernel definitions apply [.]*.
    Complex64::from_polar(1.0, -(m as f64) * theta)
}

/// Samples the first `l` kernels of `family` on a k1 x k2 patch grid.
pub fn build_kernel_bank(
    family: &MomentFamily,
    k1: usize,
    k2: usize,
    l: usize,
) -> Result<KernelBank, KernelError> {
    if k1 < 2 || k2 < 2 {
        return Err(KernelError::InvalidParameter {
            name: "patch_size",
            value: k1.min(k2) as f64,
            reason: "patch sides must be at least 2",
        });
    }
    if l == 0 {
        return Err(KernelError::InvalidParameter {
            name: "L",
            value: 0.0,
            reason: "at least one filter is required",
        });
    }
    family.validate_params()?;

    let orders = if family.is_discrete() {
        let capped = enumerate_orders_capped(family, l, Some((k1 as u32, k2 as u32)));
        if capped.len() < l {
            return Err(KernelError::Capacity {
                requested: l,
                available: k1 * k2,
                rows: k1,
                cols: k2,
            });
        }
        capped
    } else {
        enumerate_orders(family, l)
    };

    let continuous_area = 4.0 / (k1 * k2) as f64;
    let mut filters = Vec::with_capacity(l);
    let cell_area = if family.is_discrete() { 1.0 } else { continuous_area };

    for ord in &orders {
        let (n, m) = (ord.n, ord.m);
        let filter = match family {
            MomentFamily::Geometric => sample_cartesian(k1, k2, |x, y| {
                x.powi(n as i32) * y.powi(m as i32)
            }),
            MomentFamily::Legendre => {
                let norm = (2.0 * n as f64 + 1.0) * (2.0 * m as f64 + 1.0) / 4.0;
                sample_cartesian(k1, k2, |x, y| {
                    norm * legendre_poly(n, x) * legendre_poly(m as u32, y)
                })
            }
            MomentFamily::Tchebichef => {
                let rho_n = tchebichef_norm(n, k1 as u32)?;
                let rho_m = tchebichef_norm(m as u32, k2 as u32)?;
                let mut data = Vec::with_capacity(k1 * k2);
                for i in 0..k1 {
                    let tn = tchebichef_poly(n, i as u32, k1 as u32)?;
                    for j in 0..k2 {
                        let tm = tchebichef_poly(m as u32, j as u32, k2 as u32)?;
                        data.push(Complex64::new(tn * tm / (rho_n * rho_m), 0.0));
                    }
                }
                Grid::from_vec(k1, k2, data)
            }
            MomentFamily::Krawtchouk { p1, p2 } => {
                let mut data = Vec::with_capacity(k1 * k2);
                for i in 0..k1 {
                    let kn = krawtchouk_weighted(n, i as u32, *p1, k1 as u32 - 1)?;
                    for j in 0..k2 {
                        let km = krawtchouk_weighted(m as u32, j as u32, *p2, k2 as u32 - 1)?;
                        data.push(Complex64::new(kn * km, 0.0));
                    }
                }
                Grid::from_vec(k1, k2, data)
            }
            MomentFamily::DualHahn { a, c } => {
                let b1 = a + k1 as f64;
                let b2 = a + k2 as f64;
                check_dual_hahn_params(*a, b1, *c)?;
                check_dual_hahn_params(*a, b2, *c)?;
                let mut data = Vec::with_capacity(k1 * k2);
                for i in 0..k1 {
                    let wn = dual_hahn_weighted(n, a + i as f64, *a, b1, *c)?;
                    for j in 0..k2 {
                        let wm = dual_hahn_weighted(m as u32, a + j as f64, *a, b2, *c)?;
                        data.push(Complex64::new(wn * wm, 0.0));
                    }
                }
                Grid::from_vec(k1, k2, data)
            }
            MomentFamily::Zernike => {
                let norm = (n as f64 + 1.0) / PI;
                let m_abs = m.unsigned_abs();
                zernike_radial(n, m_abs, 0.0)?; // validates the pair
                sample_disk(k1, k2, |r, theta| {
                    let radial = zernike_radial(n, m_abs, r).expect("validated order");
                    angular(m, theta) * (norm * radial)
                })
            }
            MomentFamily::Pcet | MomentFamily::Pct | MomentFamily::Pst => {
                let variant = match family {
                    MomentFamily::Pcet => PolarVariant::Exponential,
                    MomentFamily::Pct => PolarVariant::Cosine,
                    _ => PolarVariant::Sine,
                };
                pht_radial(variant, n, 0.0)?; // validates the order
                sample_disk(k1, k2, |r, theta| {
                    let radial = pht_radial(variant, n, r).expect("validated order");
                    radial.conj() * angular(m, theta)
                })
            }
            MomentFamily::Gpcet { s } | MomentFamily::Gpct { s } | MomentFamily::Gpst { s } => {
                let variant = match family {
                    MomentFamily::Gpcet { .. } => PolarVariant::Exponential,
                    MomentFamily::Gpct { .. } => PolarVariant::Cosine,
                    _ => PolarVariant::Sine,
                };
                let s = *s;
                gpht_radial(variant, n, 0.5, s)?; // validates order and s
                sample_disk(k1, k2, |r, theta| {
                    let radial = gpht_radial(variant, n, r, s).expect("validated order");
                    radial.conj() * angular(m, theta)
                })
            }
        };
        debug_assert!(filter.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        filters.push(filter);
    }

    Ok(KernelBank {
        family: BankFamily::Moment(family.clone()),
        rows: k1,
        cols: k2,
        filters,
        orders,
        cell_area,
        reduction: ComplexReduction::Modulus,
    })
}

/// Projects a patch onto every filter of the bank.
///
/// Entry j is the inner product of the patch with filter j scaled by the
/// quadrature cell area; complex projections collapse per the bank's
/// [`ComplexReduction`].
pub fn moment_project(patch: &Grid<f64>, bank: &KernelBank) -> Result<Vec<f64>, KernelError> {
    if patch.rows() != bank.rows || patch.cols() != bank.cols {
        return Err(KernelError::ShapeMismatch {
            patch_rows: patch.rows(),
            patch_cols: patch.cols(),
            bank_rows: bank.rows,
            bank_cols: bank.cols,
        });
    }
    let complex = bank.family.is_complex();
    let mut out = Vec::with_capacity(bank.filters.len());
    for filter in &bank.filters {
        let mut acc = Complex64::new(0.0, 0.0);
        for (f, p) in filter.values().iter().zip(patch.values()) {
            acc += f * p;
        }
        acc *= bank.cell_area;
        let value = if complex {
            match bank.reduction {
                ComplexReduction::Modulus => acc.norm(),
                ComplexReduction::RealPart => acc.re,
            }
        } else {
            acc.re
        };
        out.push(value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
