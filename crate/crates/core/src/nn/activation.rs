//! GELU in its exact erf form.
//!
//! `gelu(x) = x · Φ(x)` with Φ the standard normal CDF, evaluated through
//! `libm::erf` (correctly rounded to within ~1 ulp, far inside the 1e-7
//! accuracy this crate documents). The tanh approximation is deliberately not
//! used: gradient checks compare against exact derivatives.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

/// Standard normal CDF.
#[inline]
fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x * FRAC_1_SQRT_2))
}

/// Standard normal density.
#[inline]
fn std_normal_pdf(x: f64) -> f64 {
    const FRAC_1_SQRT_2PI: f64 = 0.3989422804014327;
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `x · Φ(x)`.
#[inline]
pub fn gelu(x: f64) -> f64 {
    x * std_normal_cdf(x)
}

/// `d/dx [x · Φ(x)] = Φ(x) + x · φ(x)`.
#[inline]
pub fn gelu_deriv(x: f64) -> f64 {
    std_normal_cdf(x) + x * std_normal_pdf(x)
}

/// Per-layer nonlinearity. Output layers are always `Linear`; hidden layers
/// are `Gelu` except where an architecture inserts a linear bottleneck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Gelu,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Gelu => gelu(x),
            Activation::Linear => x,
        }
    }

    #[inline]
    pub fn deriv(self, x: f64) -> f64 {
        match self {
            Activation::Gelu => gelu_deriv(x),
            Activation::Linear => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent erf oracle: Maclaurin series, accurate near the origin
    /// where the alternating terms stay small. Used only on |z| ≤ sqrt(2).
    fn erf_series(z: f64) -> f64 {
        const FRAC_2_SQRT_PI: f64 = 1.1283791670955126;
        let mut term = z;
        let mut sum = z;
        for n in 1..60 {
            term *= -z * z / n as f64;
            sum += term / (2.0 * n as f64 + 1.0);
        }
        FRAC_2_SQRT_PI * sum
    }

    fn gelu_oracle(x: f64) -> f64 {
        x * 0.5 * (1.0 + erf_series(x * FRACC))
    }

    const FRACC: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn gelu_at_zero_is_zero() {
        assert_eq!(gelu(0.0), 0.0);
    }

    #[test]
    fn gelu_saturates_to_identity() {
        assert!((gelu(10.0) - 10.0).abs() < 1e-6);
        assert!(gelu(-10.0).abs() < 1e-12);
    }

    #[test]
    fn gelu_at_one_matches_high_precision_reference() {
        // x·Φ(x) at x=1, from a 40-digit evaluation of (1+erf(1/√2))/2.
        let expected = 0.8413447460685429;
        assert!((gelu(1.0) - expected).abs() < 1e-12);
        assert!((gelu(1.0) - gelu_oracle(1.0)).abs() < 1e-13);
    }

    #[test]
    fn gelu_matches_series_oracle_near_origin() {
        let mut x = -2.0;
        while x <= 2.0 {
            assert!(
                (gelu(x) - gelu_oracle(x)).abs() < 1e-13,
                "gelu({x}) deviates from series oracle"
            );
            x += 0.0625;
        }
    }

    #[test]
    fn gelu_reflection_identity() {
        // xΦ(x) − (−x)Φ(−x) = x(Φ(x)+Φ(−x)) = x.
        for i in 0..100 {
            let x = -5.0 + 0.1 * i as f64;
            assert!((gelu(x) - gelu(-x) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn gelu_deriv_matches_central_difference() {
        let h = 1e-6;
        for i in 0..80 {
            let x = -4.0 + 0.1 * i as f64;
            let numeric = (gelu(x + h) - gelu(x - h)) / (2.0 * h);
            assert!(
                (gelu_deriv(x) - numeric).abs() < 1e-8,
                "gelu'({x}) analytic {} vs numeric {numeric}",
                gelu_deriv(x)
            );
        }
    }
}
