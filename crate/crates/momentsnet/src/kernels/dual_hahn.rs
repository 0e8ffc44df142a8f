//! Weighted dual Hahn polynomials on the lattice {a, a+1, ..., b-1}.

use super::special::{ln_abs_gamma, ln_factorial, pochhammer};
use crate::error::KernelError;

/// Validates -1/2 < a < b, c < 1 + a and integer N = b - a >= 1.
pub fn check_dual_hahn_params(a: f64, b: f64, c: f64) -> Result<u32, KernelError> {
    if !(a > -0.5) {
        return Err(KernelError::InvalidParameter {
            name: "a",
            value: a,
            reason: "requires a > -1/2",
        });
    }
    if !(b > a) {
        return Err(KernelError::InvalidParameter {
            name: "b",
            value: b,
            reason: "requires b > a",
        });
    }
    if !(c < 1.0 + a) {
        return Err(KernelError::InvalidParameter {
            name: "c",
            value: c,
            reason: "requires c < 1 + a",
        });
    }
    let n = b - a;
    if (n - n.round()).abs() > 1e-9 || n.round() < 1.0 {
        return Err(KernelError::InvalidParameter {
            name: "b",
            value: b,
            reason: "requires b = a + N for a positive integer N",
        });
    }
    Ok(n.round() as u32)
}

fn ln_gamma_checked(arg: f64, context: &'static str) -> Result<f64, KernelError> {
    if arg <= 0.0 {
        return Err(KernelError::GammaPole { context, arg });
    }
    let (ln_abs, _sign) = ln_abs_gamma(arg)?;
    Ok(ln_abs)
}

/// Lattice weight ρ(x), in log space.
fn ln_rho(x: f64, a: f64, b: f64, c: f64) -> Result<f64, KernelError> {
    Ok(ln_gamma_checked(a + x + 1.0, "rho: a+x+1")?
        + ln_gamma_checked(c + x + 1.0, "rho: c+x+1")?
        - ln_gamma_checked(x - a + 1.0, "rho: x-a+1")?
        - ln_gamma_checked(b - x, "rho: b-x")?
        - ln_gamma_checked(b + x + 1.0, "rho: b+x+1")?
        - ln_gamma_checked(x - c + 1.0, "rho: x-c+1")?)
}

/// ln d_n² with d_n² = Γ(a+c+n+1) / (n! (b-a-n-1)! Γ(b-c-n)).
fn ln_dn_sq(n: u32, a: f64, b: f64, c: f64) -> Result<f64, KernelError> {
    let nf = n as f64;
    let fact_arg = b - a - nf; // (b-a-n-1)! = Γ(b-a-n)
    Ok(ln_gamma_checked(a + c + nf + 1.0, "d_n²: a+c+n+1")?
        - ln_factorial(n)
        - ln_gamma_checked(fact_arg, "d_n²: b-a-n")?
        - ln_gamma_checked(b - c - nf, "d_n²: b-c-n")?)
}

/// Terminating 3F2(-n, a-x, a+x+1; a-b+1, a+c+1; 1).
fn hyp3f2_unit(n: u32, x: f64, a: f64, b: f64, c: f64) -> Result<f64, KernelError> {
    let mut term = 1.0;
    let mut acc = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let den = (a - b + 1.0 + kf) * (a + c + 1.0 + kf) * (kf + 1.0);
        if den == 0.0 {
            return Err(KernelError::InvalidParameter {
                name: "a+c",
                value: a + c,
                reason: "degenerate 3F2 denominator",
            });
        }
        term *= (kf - n as f64) * (a - x + kf) * (a + x + 1.0 + kf) / den;
        acc += term;
    }
    Ok(acc)
}

/// Unnormalized dual Hahn polynomial w_n^{(c)}(x, a, b).
pub fn dual_hahn_poly(n: u32, x: f64, a: f64, b: f64, c: f64) -> Result<f64, KernelError> {
    let points = check_dual_hahn_params(a, b, c)?;
    if n >= points {
        return Err(KernelError::InvalidOrder {
            family: "dual_hahn",
            n,
            m: 0,
            reason: "requires n <= N-1 with N = b-a",
        });
    }
    let prefactor =
        pochhammer(a - b + 1.0, n) * pochhammer(a + c + 1.0, n) / super::special::factorial(n);
    Ok(prefactor * hyp3f2_unit(n, x, a, b, c)?)
}

/// Orthonormal weighted dual Hahn value
/// ŵ_n^{(c)}(x, a, b) = w_n^{(c)}(x, a, b) sqrt(ρ(x) Δx(x-1/2) / d_n²),
/// where the lattice x(s) = s(s+1) gives Δx(x-1/2) = 2x + 1.
pub fn dual_hahn_weighted(n: u32, x: f64, a: f64, b: f64, c: f64) -> Result<f64, KernelError> {
    let poly = dual_hahn_poly(n, x, a, b, c)?;
    if x < a - 1e-9 || x > b - 1.0 + 1e-9 {
        return Err(KernelError::InvalidParameter {
            name: "x",
            value: x,
            reason: "lattice point must lie in {a, ..., b-1}",
        });
    }
    let lattice = 2.0 * x + 1.0;
    let ln_scale = 0.5 * (ln_rho(x, a, b, c)? + lattice.ln() - ln_dn_sq(n, a, b, c)?);
    Ok(poly * ln_scale.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_poly_is_one() {
        // The 3F2 sum collapses to its k = 0 term.
        for x in 0..8 {
            assert_eq!(dual_hahn_poly(0, x as f64, 0.0, 8.0, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn order_zero_row_has_unit_mass() {
        let mut acc = 0.0;
        for x in 0..8 {
            acc += dual_hahn_weighted(0, x as f64, 0.0, 8.0, 0.0).unwrap().powi(2);
        }
        assert!((acc - 1.0).abs() < 1e-10, "Σ ŵ_0² = {acc}");
    }

    #[test]
    fn cross_order_orthogonality() {
        let mut acc = 0.0;
        for x in 0..8 {
            acc += dual_hahn_weighted(1, x as f64, 0.0, 8.0, 0.0).unwrap()
                * dual_hahn_weighted(3, x as f64, 0.0, 8.0, 0.0).unwrap();
        }
        assert!(acc.abs() < 1e-8, "<ŵ_1, ŵ_3> = {acc}");
    }

    #[test]
    fn full_gram_with_noninteger_parameters() {
        let (a, c) = (0.25, -0.4);
        let b = a + 6.0;
        for n in 0..6u32 {
            for m in 0..6u32 {
                let mut acc = 0.0;
                for i in 0..6 {
                    let x = a + i as f64;
                    acc += dual_hahn_weighted(n, x, a, b, c).unwrap()
                        * dual_hahn_weighted(m, x, a, b, c).unwrap();
                }
                let expected = if n == m { 1.0 } else { 0.0 };
                assert!(
                    (acc - expected).abs() < 1e-9,
                    "n={n} m={m}: {acc} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(check_dual_hahn_params(-0.6, 7.4, 0.0).is_err());
        assert!(check_dual_hahn_params(0.0, 8.0, 1.5).is_err());
        assert!(check_dual_hahn_params(0.0, 7.5, 0.0).is_err());
        assert!(dual_hahn_weighted(8, 0.0, 0.0, 8.0, 0.0).is_err());
    }

    #[test]
    fn pole_is_reported_with_argument() {
        // c so negative that Γ(c+x+1) at x = a has a non-positive argument.
        let err = dual_hahn_weighted(0, 0.0, 0.0, 4.0, -1.0).unwrap_err();
        match err {
            KernelError::GammaPole { arg, .. } => assert!(arg <= 0.0),
            other => panic!("expected GammaPole, got {other:?}"),
        }
    }
}
