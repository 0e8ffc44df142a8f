//! Discrete Tchebichef polynomials on the lattice {0, ..., N-1}.

use super::special::binomial;
use crate::error::KernelError;

fn check_domain(n: u32, x: u32, points: u32) -> Result<(), KernelError> {
    if points == 0 || n >= points || x >= points {
        return Err(KernelError::InvalidOrder {
            family: "tchebichef",
            n,
            m: x as i32,
            reason: "requires 0 <= n, x <= N-1",
        });
    }
    Ok(())
}

/// t_n(x) on {0, ..., N-1}.
///
/// Evaluated through the monic three-term recurrence scaled by the leading
/// coefficient C(2n, n); identical to the hypergeometric sum
/// t_n(x) = n! Σ_k (-1)^{n-k} C(N-1-k, n-k) C(n+k, n) C(x, k)
/// but without its catastrophic cancellation at larger n.
pub fn tchebichef_poly(n: u32, x: u32, points: u32) -> Result<f64, KernelError> {
    check_domain(n, x, points)?;
    let nn = points as f64;
    let xf = x as f64;
    let shift = xf - (nn - 1.0) / 2.0;
    let mut prev = 1.0; // monic p_0
    if n == 0 {
        return Ok(1.0);
    }
    let mut cur = shift; // monic p_1
    for j in 1..n {
        let jf = j as f64;
        let c = jf * jf * (nn * nn - jf * jf) / (4.0 * (4.0 * jf * jf - 1.0));
        let next = shift * cur - c * prev;
        prev = cur;
        cur = next;
    }
    Ok(binomial(2 * n, n) * cur)
}

/// Squared norm ρ(n, N) = N (N²-1)(N²-2²)...(N²-n²) / (2n+1).
pub fn tchebichef_norm(n: u32, points: u32) -> Result<f64, KernelError> {
    if points == 0 || n >= points {
        return Err(KernelError::InvalidOrder {
            family: "tchebichef",
            n,
            m: 0,
            reason: "norm requires n <= N-1",
        });
    }
    let nn = points as f64;
    let mut acc = nn;
    for i in 1..=n {
        let ifl = i as f64;
        acc *= nn * nn - ifl * ifl;
    }
    Ok(acc / (2.0 * n as f64 + 1.0))
}

/// Direct evaluation of the defining sum; used as a cross-check at small n.
#[cfg(test)]
fn tchebichef_direct(n: u32, x: u32, points: u32) -> f64 {
    use super::special::{binomial_real, factorial};
    let mut acc = 0.0;
    for k in 0..=n {
        let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign
            * binomial(points - 1 - k, n - k)
            * binomial(n + k, n)
            * binomial_real(x as f64, k);
    }
    factorial(n) * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_is_one() {
        for x in 0..8 {
            assert_eq!(tchebichef_poly(0, x, 8).unwrap(), 1.0);
        }
        assert_eq!(tchebichef_norm(0, 8).unwrap(), 8.0);
    }

    #[test]
    fn order_one_is_linear() {
        // t_1(x) = 2x - N + 1
        assert_eq!(tchebichef_poly(1, 0, 4).unwrap(), -3.0);
        for x in 0..4 {
            assert_eq!(tchebichef_poly(1, x, 4).unwrap(), 2.0 * x as f64 - 3.0);
        }
    }

    #[test]
    fn norm_small_case() {
        // ρ(1, 4) = 4 (16 - 1) / 3 = 20
        assert_eq!(tchebichef_norm(1, 4).unwrap(), 20.0);
    }

    #[test]
    fn recurrence_matches_direct_sum() {
        for points in 2..=10u32 {
            for n in 0..points.min(7) {
                for x in 0..points {
                    let a = tchebichef_poly(n, x, points).unwrap();
                    let b = tchebichef_direct(n, x, points);
                    let tol = 1e-10 * b.abs().max(1.0);
                    assert!((a - b).abs() < tol, "N={points} n={n} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn orthogonality_against_norm() {
        let points = 9u32;
        for n in 0..points {
            for m in 0..points {
                let mut acc = 0.0;
                for x in 0..points {
                    acc += tchebichef_poly(n, x, points).unwrap()
                        * tchebichef_poly(m, x, points).unwrap();
                }
                let expected = if n == m {
                    tchebichef_norm(n, points).unwrap()
                } else {
                    0.0
                };
                let scale = tchebichef_norm(n, points)
                    .unwrap()
                    .max(tchebichef_norm(m, points).unwrap());
                assert!(
                    (acc - expected).abs() < 1e-9 * scale,
                    "n={n}, m={m}: {acc} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn out_of_domain_errors() {
        assert!(tchebichef_poly(4, 0, 4).is_err());
        assert!(tchebichef_poly(0, 4, 4).is_err());
        assert!(tchebichef_norm(4, 4).is_err());
    }
}
