//! Factorials, gamma functions and Pochhammer symbols.
//!
//! Small integer arguments use exact table lookups; larger or real arguments
//! go through a Lanczos log-gamma with sign tracking so that ratios of huge
//! factorials stay finite.

use crate::error::KernelError;

/// Largest n for which n! is tabulated exactly.
const FACT_TABLE_LEN: usize = 21;

const FACTORIALS: [f64; FACT_TABLE_LEN] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

/// n! as f64; exact up to n = 20, log-space beyond.
pub fn factorial(n: u32) -> f64 {
    if (n as usize) < FACT_TABLE_LEN {
        FACTORIALS[n as usize]
    } else {
        ln_factorial(n).exp()
    }
}

/// ln(n!).
pub fn ln_factorial(n: u32) -> f64 {
    if (n as usize) < FACT_TABLE_LEN {
        FACTORIALS[n as usize].ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Lanczos approximation of ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    // g = 7, n = 9 Lanczos coefficients.
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the series argument comfortably above 1/2.
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// ln |Γ(x)| together with the sign of Γ(x), valid for any non-pole real x.
pub fn ln_abs_gamma(x: f64) -> Result<(f64, f64), KernelError> {
    if x > 0.0 {
        return Ok((ln_gamma(x), 1.0));
    }
    // Poles at 0, -1, -2, ...
    if (x - x.round()).abs() < 1e-12 {
        return Err(KernelError::GammaPole {
            context: "gamma",
            arg: x,
        });
    }
    // Reflection: Γ(x) Γ(1-x) = π / sin(πx).
    let pi = std::f64::consts::PI;
    let s = (pi * x).sin();
    let ln_abs = pi.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    Ok((ln_abs, s.signum()))
}

/// Γ(x) for arbitrary non-pole real x.
#[cfg(test)]
pub fn gamma(x: f64) -> Result<f64, KernelError> {
    let (ln_abs, sign) = ln_abs_gamma(x)?;
    Ok(sign * ln_abs.exp())
}

/// Binomial coefficient C(n, k) for integer n ≥ 0.
///
/// Computed in exact u128 arithmetic where it fits (n ≤ 120 covers every
/// lattice and order this crate sees), falling back to a float product.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 120 {
        let mut acc: u128 = 1;
        for i in 0..k as u128 {
            // acc is C(n, i) here, so the division is exact.
            acc = acc * (n as u128 - i) / (i + 1);
        }
        return acc as f64;
    }
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Generalized binomial C(x, k) = x(x-1)...(x-k+1)/k! for real x.
#[cfg(test)]
pub fn binomial_real(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (x - i as f64) / (i + 1) as f64;
    }
    acc
}

/// Pochhammer symbol (a)_k = a (a+1) ... (a+k-1) by direct product.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= a + i as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_are_exact_in_table_range() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert_eq!(factorial(12), 479001600.0);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        for n in 1u32..=25 {
            let expected = ln_factorial(n - 1);
            let got = ln_gamma(n as f64);
            assert!(
                (got - expected).abs() < 1e-10 * expected.abs().max(1.0),
                "ln_gamma({n}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn ln_gamma_half_integer() {
        // Γ(1/2) = sqrt(π)
        let got = ln_gamma(0.5);
        let expected = std::f64::consts::PI.sqrt().ln();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn gamma_reflection_handles_negatives() {
        // Γ(-0.5) = -2 sqrt(π)
        let got = gamma(-0.5).unwrap();
        let expected = -2.0 * std::f64::consts::PI.sqrt();
        assert!((got - expected).abs() < 1e-10);
    }

    #[test]
    fn gamma_pole_is_reported() {
        assert!(matches!(gamma(0.0), Err(KernelError::GammaPole { .. })));
        assert!(matches!(gamma(-3.0), Err(KernelError::GammaPole { .. })));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(10, 0), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial_real(4.0, 2), 6.0);
        assert_eq!(binomial_real(2.5, 2), 2.5 * 1.5 / 2.0);
    }

    #[test]
    fn pochhammer_products() {
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(3.0, 3), 3.0 * 4.0 * 5.0);
        assert_eq!(pochhammer(-2.0, 3), 0.0);
    }
}
