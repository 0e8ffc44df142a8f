//! Legendre polynomials on [-1, 1].

use super::special::binomial;

/// P_n(x) = (1/2^n) Σ_k (-1)^k (2n-2k)! / (k! (n-k)! (n-2k)!) x^{n-2k}
///
/// The integer coefficient factors as C(2n-2k, n-k) C(n-k, k), which keeps
/// it exact well past where the raw factorial ratio loses digits.
pub fn legendre_poly(n: u32, x: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..=n / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = binomial(2 * n - 2 * k, n - k) * binomial(n - k, k);
        acc += sign * coeff * x.powi((n - 2 * k) as i32);
    }
    acc / 2.0f64.powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        for &x in &[-1.0, -0.2, 0.0, 0.5, 1.0] {
            assert_eq!(legendre_poly(0, x), 1.0);
            assert!((legendre_poly(1, x) - x).abs() < 1e-15);
            assert!((legendre_poly(2, x) - (3.0 * x * x - 1.0) / 2.0).abs() < 1e-14);
        }
        assert!((legendre_poly(1, 0.5) - 0.5).abs() < 1e-15);
        assert!((legendre_poly(2, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bounded_on_interval() {
        for n in 0..=12u32 {
            for i in 0..=40 {
                let x = -1.0 + i as f64 / 20.0;
                assert!(legendre_poly(n, x).abs() <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn three_term_recurrence() {
        // (n+1) P_{n+1}(x) = (2n+1) x P_n(x) - n P_{n-1}(x)
        for n in 1..=12u32 {
            for i in 0..20 {
                let x = -0.95 + i as f64 * 0.1;
                let lhs = (n + 1) as f64 * legendre_poly(n + 1, x);
                let rhs = (2 * n + 1) as f64 * x * legendre_poly(n, x)
                    - n as f64 * legendre_poly(n - 1, x);
                assert!(
                    (lhs - rhs).abs() < 1e-10,
                    "recurrence broken at n={n}, x={x}: {lhs} vs {rhs}"
                );
            }
        }
    }
}
