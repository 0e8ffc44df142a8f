//! Zernike radial polynomials on the unit disk.

use super::special::factorial;
use crate::error::KernelError;

/// Radial polynomial E_{n|m|}(r) for |m| ≤ n, n - |m| even, r in [0, 1].
///
/// E_{nm}(r) = Σ_k (-1)^k (n-k)! / (k! ((n-2k+m)/2)! ((n-2k-m)/2)!) r^{n-2k}
pub fn zernike_radial(n: u32, m_abs: u32, r: f64) -> Result<f64, KernelError> {
    if m_abs > n || (n - m_abs) % 2 != 0 {
        return Err(KernelError::InvalidOrder {
            family: "zernike",
            n,
            m: m_abs as i32,
            reason: "requires |m| <= n and n - |m| even",
        });
    }
    let mut acc = 0.0;
    let k_max = (n - m_abs) / 2;
    for k in 0..=k_max {
        let num = factorial(n - k);
        let den = factorial(k) * factorial((n - 2 * k + m_abs) / 2) * factorial((n - 2 * k - m_abs) / 2);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * num / den * r.powi((n - 2 * k) as i32);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_term() {
        assert_eq!(zernike_radial(0, 0, 0.37).unwrap(), 1.0);
    }

    #[test]
    fn linear_term_is_r() {
        for &r in &[0.0, 0.5, 1.0] {
            assert_eq!(zernike_radial(1, 1, r).unwrap(), r);
        }
    }

    #[test]
    fn defocus_term() {
        // E_{2,0}(r) = 2 r^2 - 1
        for &r in &[0.0, 0.3, 1.0] {
            let got = zernike_radial(2, 0, r).unwrap();
            assert!((got - (2.0 * r * r - 1.0)).abs() < 1e-14);
        }
        assert!((zernike_radial(2, 0, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_power_of_r() {
        // E_{nn}(r) = r^n exactly: the sum has a single unit-coefficient term.
        for n in 0..=10u32 {
            for &r in &[0.0, 0.25, 0.7, 1.0] {
                let got = zernike_radial(n, n, r).unwrap();
                assert_eq!(got, r.powi(n as i32), "n={n}, r={r}");
            }
        }
    }

    #[test]
    fn unit_radius_value_is_one() {
        for n in 0..=10u32 {
            for m in (n % 2..=n).step_by(2) {
                let got = zernike_radial(n, m, 1.0).unwrap();
                assert!((got - 1.0).abs() < 1e-9, "E_({n},{m})(1) = {got}");
            }
        }
    }

    #[test]
    fn invalid_pairs_error() {
        assert!(zernike_radial(2, 1, 0.5).is_err());
        assert!(zernike_radial(1, 3, 0.5).is_err());
    }
}
