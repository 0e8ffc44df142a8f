//! Radial parts of the polar harmonic transforms and their generic variants.

use crate::error::KernelError;
use num_complex::Complex64;
use std::f64::consts::PI;

/// The three polar harmonic radial flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarVariant {
    /// Complex exponential radial part (PCET / GPCET).
    Exponential,
    /// Cosine radial part (PCT / GPCT).
    Cosine,
    /// Sine radial part (PST / GPST); requires n >= 1.
    Sine,
}

fn check_sine_order(variant: PolarVariant, n: u32) -> Result<(), KernelError> {
    if variant == PolarVariant::Sine && n == 0 {
        return Err(KernelError::InvalidOrder {
            family: "polar_sine",
            n,
            m: 0,
            reason: "sine radial part requires n >= 1",
        });
    }
    Ok(())
}

/// Radial part of PCET/PCT/PST at radius r in [0, 1].
///
/// PCET: R_n(r) = exp(i 2π n r²); PCT: 1 for n = 0, √2 cos(π n r²) for n > 0;
/// PST: sin(π n r²).
pub fn pht_radial(variant: PolarVariant, n: u32, r: f64) -> Result<Complex64, KernelError> {
    check_sine_order(variant, n)?;
    let r2 = r * r;
    let value = match variant {
        PolarVariant::Exponential => Complex64::from_polar(1.0, 2.0 * PI * n as f64 * r2),
        PolarVariant::Cosine => {
            if n == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(2.0f64.sqrt() * (PI * n as f64 * r2).cos(), 0.0)
            }
        }
        PolarVariant::Sine => Complex64::new((PI * n as f64 * r2).sin(), 0.0),
    };
    Ok(value)
}

/// Radial part of GPCET/GPCT/GPST: the PHT shape with r² generalized to r^s
/// and weight sqrt(s r^{s-2} / 2π).
///
/// At r = 0 with s < 2 the weight diverges; the value is forced to 0 there.
pub fn gpht_radial(
    variant: PolarVariant,
    n: u32,
    r: f64,
    s: f64,
) -> Result<Complex64, KernelError> {
    check_sine_order(variant, n)?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(KernelError::InvalidParameter {
            name: "s",
            value: s,
            reason: "must be strictly positive",
        });
    }
    if r == 0.0 && s < 2.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let weight = (s * r.powf(s - 2.0) / (2.0 * PI)).sqrt();
    let rs = r.powf(s);
    let value = match variant {
        PolarVariant::Exponential => Complex64::from_polar(weight, 2.0 * PI * n as f64 * rs),
        PolarVariant::Cosine => {
            let shape = if n == 0 {
                1.0
            } else {
                2.0f64.sqrt() * (PI * n as f64 * rs).cos()
            };
            Complex64::new(weight * shape, 0.0)
        }
        PolarVariant::Sine => Complex64::new(
            weight * 2.0f64.sqrt() * (PI * n as f64 * rs).sin(),
            0.0,
        ),
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcet_at_origin_is_one() {
        for n in 0..5 {
            let v = pht_radial(PolarVariant::Exponential, n, 0.0).unwrap();
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn pcet_has_unit_modulus() {
        for n in 0..6 {
            for i in 0..=10 {
                let r = i as f64 / 10.0;
                let v = pht_radial(PolarVariant::Exponential, n, r).unwrap();
                assert!((v.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pct_zero_order_is_one() {
        for &r in &[0.0, 0.4, 1.0] {
            let v = pht_radial(PolarVariant::Cosine, 0, r).unwrap();
            assert_eq!(v, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn pst_vanishes_at_unit_radius_for_n1() {
        let v = pht_radial(PolarVariant::Sine, 1, 1.0).unwrap();
        assert!(v.norm() < 1e-14);
        assert!(pht_radial(PolarVariant::Sine, 0, 0.5).is_err());
    }

    #[test]
    fn gpcet_s2_equals_pcet_over_sqrt_pi() {
        let scale = 1.0 / std::f64::consts::PI.sqrt();
        for n in 0..4 {
            for &r in &[0.1, 0.5, 0.9] {
                let g = gpht_radial(PolarVariant::Exponential, n, r, 2.0).unwrap();
                let p = pht_radial(PolarVariant::Exponential, n, r).unwrap() * scale;
                assert!((g - p).norm() < 1e-14, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn gpct_zero_order_weight() {
        let v = gpht_radial(PolarVariant::Cosine, 0, 0.5, 2.0).unwrap();
        let expected = (1.0 / std::f64::consts::PI).sqrt();
        assert!((v.re - expected).abs() < 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn gpst_vanishes_at_unit_radius_for_n1_s2() {
        let v = gpht_radial(PolarVariant::Sine, 1, 1.0, 2.0).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn singular_center_is_forced_to_zero() {
        let v = gpht_radial(PolarVariant::Exponential, 2, 0.0, 1.0).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        assert!(v.re.is_finite());
    }

    #[test]
    fn invalid_s_errors() {
        assert!(gpht_radial(PolarVariant::Exponential, 1, 0.5, 0.0).is_err());
        assert!(gpht_radial(PolarVariant::Exponential, 1, 0.5, -1.0).is_err());
    }
}
