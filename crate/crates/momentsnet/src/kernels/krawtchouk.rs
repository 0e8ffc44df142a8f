//! Weighted Krawtchouk polynomials on the lattice {0, ..., N}.

use super::special::binomial;
use crate::error::KernelError;

fn check_p(p: f64) -> Result<(), KernelError> {
    if !(p > 0.0 && p < 1.0) || !p.is_finite() {
        return Err(KernelError::InvalidParameter {
            name: "p",
            value: p,
            reason: "must lie strictly inside (0,1)",
        });
    }
    Ok(())
}

/// K_n(x; p, N) = 2F1(-n, -x; -N; 1/p), evaluated by the three-term
/// recurrence in n.
pub fn krawtchouk_poly(n: u32, x: u32, p: f64, param_n: u32) -> Result<f64, KernelError> {
    check_p(p)?;
    if n > param_n || x > param_n {
        return Err(KernelError::InvalidOrder {
            family: "krawtchouk",
            n,
            m: x as i32,
            reason: "requires 0 <= n, x <= N",
        });
    }
    let nn = param_n as f64;
    let xf = x as f64;
    let mut prev = 1.0;
    if n == 0 {
        return Ok(1.0);
    }
    let mut cur = 1.0 - xf / (p * nn);
    for j in 1..n {
        let jf = j as f64;
        let next = ((p * (nn - jf) + jf * (1.0 - p) - xf) * cur - jf * (1.0 - p) * prev)
            / (p * (nn - jf));
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Binomial weight w(x; p, N) = C(N, x) p^x (1-p)^{N-x}.
pub fn krawtchouk_weight(x: u32, p: f64, param_n: u32) -> f64 {
    binomial(param_n, x) * p.powi(x as i32) * (1.0 - p).powi((param_n - x) as i32)
}

/// Squared norm ρ(n; p, N) = ((1-p)/p)^n / C(N, n).
pub fn krawtchouk_sq_norm(n: u32, p: f64, param_n: u32) -> f64 {
    ((1.0 - p) / p).powi(n as i32) / binomial(param_n, n)
}

/// Weighted polynomial K̄_n(x; p, N) = K_n(x) sqrt(w(x) / ρ(n)); the set
/// {K̄_n}_n is orthonormal over x in {0, ..., N}.
pub fn krawtchouk_weighted(n: u32, x: u32, p: f64, param_n: u32) -> Result<f64, KernelError> {
    let poly = krawtchouk_poly(n, x, p, param_n)?;
    let w = krawtchouk_weight(x, p, param_n);
    let rho = krawtchouk_sq_norm(n, p, param_n);
    Ok(poly * (w / rho).sqrt())
}
