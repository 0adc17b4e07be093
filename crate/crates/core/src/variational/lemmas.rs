//! Closed-form maxima of quadratic forms over nonnegative `l^delta` spheres
//! and of off-diagonal `l^beta` sums over trace-one PSD matrices.

use crate::error::{Error, Result};

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta must lie in (0,1), got {delta}")))
    }
}

/// `max_{1<=k<=n} (lambda + (k-1) mu) k^(1 - 2/delta)`: the maximum of
/// `<By, y>` over nonnegative `y` with `sum y_i^delta = 1`, where `B` has
/// diagonal `lambda` and off-diagonal `mu`.
pub fn quadform_max_simplex(lambda: f64, mu: f64, delta: f64, n: usize) -> Result<f64> {
    check_delta(delta)?;
    if !(lambda >= 0.0 && mu > lambda && mu.is_finite()) {
        return Err(Error::Domain(format!("need 0 <= lambda < mu, got lambda = {lambda}, mu = {mu}")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let e = 1.0 - 2.0 / delta;
    Ok((1..=n)
        .map(|k| {
            let k = k as f64;
            (lambda + (k - 1.0) * mu) * k.powf(e)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `max(lambda, (lambda + mu) 2^(1 - 2/delta))`: the maximum of
/// `lambda (x^2 + y^2) + 2 mu x y` over `x, y >= 0` with `x^delta + y^delta = 1`.
pub fn quadform_max_bipartite(lambda: f64, mu: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(lambda >= 0.0 && mu >= 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(Error::Domain(format!("need lambda, mu >= 0, got {lambda}, {mu}")));
    }
    Ok(lambda.max((lambda + mu) * 2f64.powf(1.0 - 2.0 / delta)))
}

/// `max_{2<=k<=n} (k-1) k^(1-beta)`: the maximum of `sum_{i != j} |X_ij|^beta`
/// over `n x n` PSD Hermitian `X` of unit trace.
pub fn psd_offdiag_max(beta: f64, n: usize) -> Result<f64> {
    if !(beta >= 2.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be at least 2, got {beta}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    Ok((2..=n)
        .map(|k| {
            let k = k as f64;
            (k - 1.0) * k.powf(1.0 - beta)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_anchors() {
        assert!((quadform_max_simplex(0.0, 1.0, 0.5, 3).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(quadform_max_simplex(0.3, 1.0, 0.5, 1).unwrap(), 0.3);
        let v = quadform_max_simplex(0.5, 1.0, 0.8, 4).unwrap();
        assert!((v - 1.5 * 2f64.powf(-1.5)).abs() < 1e-15);
        assert!(quadform_max_simplex(1.0, 1.0, 0.5, 3).is_err());
        assert!(quadform_max_simplex(0.0, 1.0, 1.0, 3).is_err());
        assert!(quadform_max_simplex(0.0, 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn bipartite_anchors() {
        assert_eq!(quadform_max_bipartite(0.7, 0.0, 0.4).unwrap(), 0.7);
        assert!((quadform_max_bipartite(0.0, 1.0, 0.5).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(quadform_max_bipartite(1.0, 1.0, 0.8).unwrap(), 1.0);
        assert!(quadform_max_bipartite(-1.0, 1.0, 0.8).is_err());
    }

    #[test]
    fn psd_anchors() {
        assert!((psd_offdiag_max(2.0, 4).unwrap() - 0.75).abs() < 1e-15);
        assert!((psd_offdiag_max(3.3, 2).unwrap() - 2f64.powf(-2.3)).abs() < 1e-15);
        assert!((psd_offdiag_max(3.0, 5).unwrap() - 0.25).abs() < 1e-15);
        assert!(psd_offdiag_max(1.5, 4).is_err());
        assert!(psd_offdiag_max(2.0, 1).is_err());
    }
}
