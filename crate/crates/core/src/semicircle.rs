//! Scalar functions of the semicircular law: density, Stieltjes transform
//! (real edge branch and complex plane), its inverse on `(0, 1]`, and the
//! largest-eigenvalue rate function built on top of it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tail exponent `alpha` together with the variational constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFunctionParams {
    alpha: f64,
    c: f64,
}

impl RateFunctionParams {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParams(format!("alpha must lie in (0,2), got {alpha}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParams(format!("c must be positive and finite, got {c}")));
        }
        Ok(Self { alpha, c })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Density `(1/2pi) sqrt(4 - t^2)` on `[-2, 2]`, zero outside.
pub fn semicircle_density(t: f64) -> f64 {
    if t.abs() <= 2.0 {
        (4.0 - t * t).max(0.0).sqrt() / (2.0 * std::f64::consts::PI)
    } else {
        0.0
    }
}

/// Cumulative distribution function of the semicircular law.
pub fn semicircle_cdf(t: f64) -> f64 {
    if t <= -2.0 {
        0.0
    } else if t >= 2.0 {
        1.0
    } else {
        let s = t / 2.0;
        0.5 + (s * (1.0 - s * s).sqrt() + s.asin()) / std::f64::consts::PI
    }
}

/// Stieltjes transform on `[2, inf)`: `(x - sqrt(x^2 - 4)) / 2`.
///
/// Evaluated as `2 / (x + sqrt(x^2 - 4))` to avoid cancellation for large `x`.
pub fn stieltjes(x: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::Domain(format!("stieltjes is defined on [2, inf), got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let root = ((x - 2.0) * (x + 2.0)).sqrt();
    Ok(2.0 / (x + root))
}

/// Stieltjes transform on `C \ (-2, 2)`.
///
/// Uses `sqrt(z - 2) * sqrt(z + 2)` with principal roots, which has its cut on
/// `[-2, 2]` and behaves like `z` at infinity, so `G(z) ~ 1/z`.
pub fn stieltjes_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re > -2.0 && z.re < 2.0 {
        return Err(Error::Domain(format!(
            "stieltjes_complex is undefined on the open cut (-2,2), got {}",
            z.re
        )));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    let root = (z - 2.0).sqrt() * (z + 2.0).sqrt();
    let sum = z + root;
    if sum.norm() == 0.0 {
        // z = +-2 up to signed zeros
        return Ok(z / 2.0);
    }
    Ok(Complex64::new(2.0, 0.0) / sum)
}

/// Inverse of [`stieltjes`] on `(0, 1]`: `g + 1/g`.
pub fn stieltjes_inverse(g: f64) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::Domain(format!("stieltjes_inverse is defined on (0,1], got {g}")));
    }
    Ok(g + 1.0 / g)
}

/// Rate function of the largest eigenvalue: `+inf` below 2, `0` at 2 and
/// `c * G(x)^(-alpha)` above. NaN input maps to `+inf`.
pub fn rate_j(x: f64, params: &RateFunctionParams) -> f64 {
    if x == 2.0 {
        return 0.0;
    }
    if !(x > 2.0) {
        return f64::INFINITY;
    }
    match stieltjes(x) {
        Ok(g) if g > 0.0 => params.c * g.powf(-params.alpha),
        _ => f64::INFINITY,
    }
}

/// Kolmogorov–Smirnov distance between the empirical measure of `eigenvalues`
/// and the semicircular law.
pub fn ks_distance_to_semicircle(eigenvalues: &[f64]) -> f64 {
    let mut xs = eigenvalues.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = semicircle_cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_quantiles_is_small() {
        // midpoint quantiles of the law itself
        let n = 400;
        let q: Vec<f64> = (0..n)
            .map(|i| {
                let target = (i as f64 + 0.5) / n as f64;
                let (mut lo, mut hi) = (-2.0, 2.0);
                for _ in 0..80 {
                    let m = 0.5 * (lo + hi);
                    if semicircle_cdf(m) < target {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        assert!((ks_distance_to_semicircle(&q) - 0.5 / n as f64).abs() < 1e-12);
        assert!((ks_distance_to_semicircle(&[10.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_anchors() {
        assert!((semicircle_density(0.0) - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(semicircle_density(2.0), 0.0);
        assert_eq!(semicircle_density(-2.5), 0.0);
        assert!((semicircle_density(1.0) - 0.275_664_447_7).abs() < 1e-10);
    }

    #[test]
    fn cdf_is_consistent_with_density() {
        assert_eq!(semicircle_cdf(-3.0), 0.0);
        assert_eq!(semicircle_cdf(3.0), 1.0);
        assert!((semicircle_cdf(0.0) - 0.5).abs() < 1e-15);
        let h = 1e-6;
        for &t in &[-1.5, -0.3, 0.7, 1.9] {
            let d = (semicircle_cdf(t + h) - semicircle_cdf(t - h)) / (2.0 * h);
            assert!((d - semicircle_density(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn stieltjes_anchors() {
        assert_eq!(stieltjes(2.0).unwrap(), 1.0);
        assert!((stieltjes(2.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((stieltjes(5.0).unwrap() - (5.0 - 21f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!(matches!(stieltjes(1.99), Err(Error::Domain(_))));
        assert!(stieltjes(f64::NAN).is_err());
    }

    #[test]
    fn inverse_anchors() {
        assert_eq!(stieltjes_inverse(1.0).unwrap(), 2.0);
        assert_eq!(stieltjes_inverse(0.5).unwrap(), 2.5);
        assert!((stieltjes_inverse(0.2).unwrap() - 5.2).abs() < 1e-15);
        assert!(stieltjes_inverse(0.0).is_err());
        assert!(stieltjes_inverse(1.01).is_err());
        assert!(stieltjes_inverse(-0.5).is_err());
    }

    #[test]
    fn complex_branch() {
        let g = stieltjes_complex(Complex64::new(2.5, 0.0)).unwrap();
        assert!((g - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let g = stieltjes_complex(Complex64::new(10.0, 0.0)).unwrap();
        assert!((g.re - (10.0 - 96f64.sqrt()) / 2.0).abs() < 1e-15);
        let g = stieltjes_complex(Complex64::new(-2.5, 0.0)).unwrap();
        assert!((g - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        let g = stieltjes_complex(Complex64::new(0.0, 1.0)).unwrap();
        assert!(g.norm() < 1.0 && g.im < 0.0);
        assert_eq!(stieltjes_complex(Complex64::new(2.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(stieltjes_complex(Complex64::new(-2.0, 0.0)).unwrap(), Complex64::new(-1.0, 0.0));
        assert!(stieltjes_complex(Complex64::new(0.3, 0.0)).is_err());
        // G(z) ~ 1/z
        let z = Complex64::new(3e5, -4e5);
        assert!(((stieltjes_complex(z).unwrap() * z) - 1.0).norm() < 1e-9);
    }

    #[test]
    fn rate_anchors() {
        let p = RateFunctionParams::new(1.0, 1.0).unwrap();
        assert_eq!(rate_j(2.0, &p), 0.0);
        assert_eq!(rate_j(1.5, &p), f64::INFINITY);
        assert!((rate_j(2.5, &p) - 2.0).abs() < 1e-14);
        assert_eq!(rate_j(f64::NAN, &p), f64::INFINITY);
        assert!(RateFunctionParams::new(2.0, 1.0).is_err());
        assert!(RateFunctionParams::new(1.0, 0.0).is_err());
        assert!(RateFunctionParams::new(1.0, f64::INFINITY).is_err());
    }
}
