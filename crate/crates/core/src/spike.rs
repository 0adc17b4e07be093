//! Finite-rank deformations `H + sum_i theta_i u_i u_i*`.
//!
//! Above the spectrum of `H`, the eigenvalues of the deformed matrix are the
//! zeros of `f_N(x) = det M_N(x)` with
//! `M_N(x) = I_k - (theta_i <u_i, (x - H)^{-1} u_j>)_{i,j}`. In the large-`N`
//! limit the resolvent becomes isotropic and `f_N` tends to
//! `prod_i (1 - theta_i G(x))`, whose largest zero is the BBP outlier.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{determinant, inner, norm, Hermitian};
use crate::semicircle::{stieltjes, stieltjes_inverse};

/// Tolerance on `|<u_i, u_j> - delta_ij|`.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Grid points used by [`largest_zero`]: half linear, half geometric near `lo`.
pub const SCAN_POINTS: usize = 2048;

/// Width at which bisection stops.
pub const ZERO_TOL: f64 = 1e-12;

/// Smallest admissible distance above `lambda_max(H)`.
pub fn spectral_margin(lambda_max: f64) -> f64 {
    1e-9 * (1.0 + lambda_max.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikeSpec {
    thetas: Vec<f64>,
    vectors: Vec<Vec<Complex64>>,
}

impl SpikeSpec {
    /// `thetas` must be nonzero and nondecreasing; `vectors` orthonormal.
    pub fn new(thetas: Vec<f64>, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if thetas.is_empty() || thetas.len() != vectors.len() {
            return Err(Error::InvalidParams(format!(
                "need k >= 1 thetas and as many vectors, got {} and {}",
                thetas.len(),
                vectors.len()
            )));
        }
        if thetas.iter().any(|t| !t.is_finite() || *t == 0.0) {
            return Err(Error::InvalidParams("thetas must be finite and nonzero".into()));
        }
        if thetas.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParams("thetas must be in nondecreasing order".into()));
        }
        let n = vectors[0].len();
        if n == 0 || vectors.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidParams("spike vectors must share a positive dimension".into()));
        }
        for (i, u) in vectors.iter().enumerate() {
            for (j, v) in vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (inner(u, v) - target).norm() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidParams(format!("spike vectors {i} and {j} are not orthonormal")));
                }
            }
        }
        Ok(Self { thetas, vectors })
    }

    /// A single spike along the `i`-th basis vector of dimension `n`.
    pub fn basis(theta: f64, i: usize, n: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidParams(format!("basis index {i} outside dimension {n}")));
        }
        let mut u = vec![Complex64::default(); n];
        u[i] = Complex64::new(1.0, 0.0);
        Self::new(vec![theta], vec![u])
    }

    pub fn k(&self) -> usize {
        self.thetas.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    /// `C = sum_i theta_i u_i u_i*` as a dense matrix.
    pub fn perturbation(&self) -> Hermitian {
        let mut c = Hermitian::zeros(self.dim(), false);
        for (t, u) in self.thetas.iter().zip(&self.vectors) {
            c.add_rank_one(*t, u);
        }
        c
    }
}

/// `H` together with a spike and the cached top eigenvalue of `H`.
#[derive(Debug, Clone)]
pub struct EigenEquation {
    h: Hermitian,
    spike: SpikeSpec,
    lambda_max: f64,
}

impl EigenEquation {
    pub fn new(h: Hermitian, spike: SpikeSpec) -> Result<Self> {
        if h.dim() != spike.dim() {
            return Err(Error::InvalidParams(format!(
                "matrix dimension {} does not match spike dimension {}",
                h.dim(),
                spike.dim()
            )));
        }
        let lambda_max = h.largest_eigenvalue()?;
        Ok(Self { h, spike, lambda_max })
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn spike(&self) -> &SpikeSpec {
        &self.spike
    }

    pub fn matrix_h(&self) -> &Hermitian {
        &self.h
    }

    fn check(&self, x: f64) -> Result<()> {
        if x - self.lambda_max >= spectral_margin(self.lambda_max) {
            Ok(())
        } else {
            Err(Error::InsideSpectrum { x, lambda_max: self.lambda_max })
        }
    }

    /// `M_N(x)` as a `k x k` row-major matrix, from `k` solves against a
    /// Cholesky factor of `x - H`.
    pub fn matrix(&self, x: f64) -> Result<Vec<Vec<Complex64>>> {
        self.check(x)?;
        let factor = self
            .h
            .shifted_factor(x)
            .map_err(|_| Error::InsideSpectrum { x, lambda_max: self.lambda_max })?;
        let sol = factor.solve(self.spike.vectors());
        let k = self.spike.k();
        Ok((0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        Complex64::new(delta, 0.0) - self.spike.thetas[i] * inner(&self.spike.vectors[i], &sol[j])
                    })
                    .collect()
            })
            .collect())
    }

    /// `det M_N(x)`, which is real.
    pub fn f_n(&self, x: f64) -> Result<f64> {
        Ok(determinant(&self.matrix(x)?).re)
    }

    /// Bracket `[lambda_max(H) + margin, lambda_max(H) + max(theta_k, 0) + 1]`
    /// containing every eigenvalue of the deformed matrix above `H`'s spectrum.
    pub fn bracket(&self) -> (f64, f64) {
        let lo = self.lambda_max + spectral_margin(self.lambda_max);
        let top = self.spike.thetas.last().copied().unwrap_or(0.0).max(0.0);
        (lo, self.lambda_max + top + 1.0)
    }

    /// Largest zero of `f_N` above the spectrum of `H`, if any.
    pub fn largest_zero(&self) -> Result<Option<f64>> {
        let (lo, hi) = self.bracket();
        largest_zero(|x| self.f_n(x).unwrap_or(f64::NAN), lo, hi)
    }
}

/// Rightmost zero of `f` on `[lo, hi]`.
///
/// Scans [`SCAN_POINTS`] points (linear plus geometric near `lo`) for the
/// rightmost sign change, then bisects to [`ZERO_TOL`]. A grid point where
/// `f` vanishes exactly counts as a zero. `None` when no sign change is seen.
pub fn largest_zero(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Option<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    let half = SCAN_POINTS / 2;
    let width = hi - lo;
    let mut grid: Vec<f64> = (0..half).map(|i| lo + width * i as f64 / (half - 1) as f64).collect();
    grid.extend((0..half).map(|i| lo + width * 10f64.powf(-12.0 * (1.0 - i as f64 / (half - 1) as f64))));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();

    for idx in (0..grid.len()).rev() {
        let v = values[idx];
        if v == 0.0 {
            return Ok(Some(grid[idx]));
        }
        if idx == 0 {
            break;
        }
        let u = values[idx - 1];
        if u.is_finite() && v.is_finite() && u * v < 0.0 {
            let (mut a, mut b) = (grid[idx - 1], grid[idx]);
            let mut fa = u;
            while b - a > ZERO_TOL {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m);
                if fm == 0.0 {
                    return Ok(Some(m));
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
    }
    Ok(None)
}

/// `prod_i (1 - theta_i G(x))` for `x >= 2`.
pub fn limit_f(thetas: &[f64], x: f64) -> Result<f64> {
    let g = stieltjes(x)?;
    Ok(thetas.iter().map(|t| 1.0 - t * g).product())
}

/// `G^{-1}(1/theta) = theta + 1/theta` above the threshold, else `2`.
pub fn bbp_outlier(theta: f64) -> f64 {
    if theta > 1.0 {
        stieltjes_inverse(1.0 / theta).unwrap_or(2.0)
    } else {
        2.0
    }
}

/// The outlier location predicted by the top eigenvalue of `C`.
pub fn mu_eps(c: &Hermitian) -> Result<f64> {
    Ok(bbp_outlier(c.largest_eigenvalue()?))
}

/// `|<u, (x - H)^{-1} v> - <u, v> G(x)|` for `x` above both `2` and the
/// spectrum of `H`.
pub fn isotropy_gap(h: &Hermitian, u: &[Complex64], v: &[Complex64], x: f64) -> Result<f64> {
    let n = h.dim();
    if u.len() != n || v.len() != n {
        return Err(Error::InvalidParams("vector dimension does not match the matrix".into()));
    }
    for w in [u, v] {
        if (norm(w) - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::InvalidParams("isotropy vectors must have unit norm".into()));
        }
    }
    let lambda_max = h.largest_eigenvalue()?;
    let floor = lambda_max.max(2.0);
    if !(x - floor >= spectral_margin(floor)) {
        return Err(Error::InsideSpectrum { x, lambda_max });
    }
    let factor = h.shifted_factor(x)?;
    let rv = factor.solve(&[v.to_vec()]);
    Ok((inner(u, &rv[0]) - inner(u, v) * stieltjes(x)?).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, n: usize) -> Vec<Complex64> {
        let mut u = vec![Complex64::default(); n];
        u[i] = Complex64::new(1.0, 0.0);
        u
    }

    #[test]
    fn spec_validation() {
        assert!(SpikeSpec::new(vec![], vec![]).is_err());
        assert!(SpikeSpec::new(vec![0.0], vec![e(0, 2)]).is_err());
        assert!(SpikeSpec::new(vec![2.0, 1.0], vec![e(0, 2), e(1, 2)]).is_err());
        assert!(SpikeSpec::new(vec![1.0, 2.0], vec![e(0, 2), e(0, 2)]).is_err());
        let mut v = e(0, 2);
        v[0] *= 1.1;
        assert!(SpikeSpec::new(vec![1.0], vec![v]).is_err());
        assert_eq!(SpikeSpec::new(vec![-1.0, 2.0], vec![e(0, 3), e(2, 3)]).unwrap().k(), 2);
    }

    #[test]
    fn zero_matrix_anchors() {
        let eq = EigenEquation::new(Hermitian::zeros(4, false), SpikeSpec::basis(3.0, 1, 4).unwrap()).unwrap();
        let m = eq.matrix(5.0).unwrap();
        assert!((m[0][0] - Complex64::new(1.0 - 3.0 / 5.0, 0.0)).norm() < 1e-15);
        assert!(eq.f_n(3.0).unwrap().abs() < 1e-15);
        assert!((eq.f_n(4.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((eq.largest_zero().unwrap().unwrap() - 3.0).abs() < 1e-11);
        assert!(matches!(eq.f_n(0.0), Err(Error::InsideSpectrum { .. })));
    }

    #[test]
    fn one_by_one_anchor() {
        let h = Hermitian::from_diagonal(&[0.5]);
        let eq = EigenEquation::new(h, SpikeSpec::basis(2.0, 0, 1).unwrap()).unwrap();
        assert!((eq.matrix(3.0).unwrap()[0][0].re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn generic_zero_finder() {
        let z = largest_zero(|x| 1.0 - 3.0 / x, 0.1, 10.0).unwrap().unwrap();
        assert!((z - 3.0).abs() < 1e-11);
        assert_eq!(largest_zero(|_| 1.0, 0.0, 1.0).unwrap(), None);
        assert!(largest_zero(|x| x, 1.0, 1.0).is_err());
        assert!(largest_zero(|x| x, f64::NAN, 1.0).is_err());
        // rightmost of several zeros
        let z = largest_zero(|x| (x - 1.0) * (x - 2.0) * (x - 3.5), 0.0, 5.0).unwrap().unwrap();
        assert!((z - 3.5).abs() < 1e-11);
    }

    #[test]
    fn limit_and_outlier_anchors() {
        assert!(limit_f(&[2.0], 2.5).unwrap().abs() < 1e-15);
        for x in [2.0, 2.1, 3.0, 50.0] {
            let v = limit_f(&[0.5], x).unwrap();
            assert!(v > 0.0 && v < 1.0);
        }
        // G(0.3 + 1/0.3) = 0.3
        let x = 0.3 + 1.0 / 0.3;
        assert!((limit_f(&[-1.0, 3.0], x).unwrap() - 0.13).abs() < 1e-13);
        assert!(limit_f(&[1.0], 1.5).is_err());
        assert_eq!(bbp_outlier(2.0), 2.5);
        assert_eq!(bbp_outlier(1.0), 2.0);
        assert_eq!(bbp_outlier(0.5), 2.0);
        let z = largest_zero(|x| limit_f(&[1.5], x).unwrap(), 2.001, 20.0).unwrap().unwrap();
        assert!((z - (2.0 / 3.0 + 1.5)).abs() < 1e-11);
    }

    #[test]
    fn mu_eps_anchors() {
        assert_eq!(mu_eps(&Hermitian::zeros(3, false)).unwrap(), 2.0);
        let c = Hermitian::from_diagonal(&[3.0, 0.0]);
        assert!((mu_eps(&c).unwrap() - (3.0 + 1.0 / 3.0)).abs() < 1e-14);
        let c = Hermitian::from_real_fn(4, |i, j| if (i, j) == (0, 1) || (i, j) == (1, 0) { 2.0 } else { 0.0 }).unwrap();
        assert!((mu_eps(&c).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn isotropy_on_zero_matrix() {
        let h = Hermitian::zeros(3, false);
        let u = e(0, 3);
        let gap = isotropy_gap(&h, &u, &u, 10.0).unwrap();
        assert!((gap - (stieltjes(10.0).unwrap() - 0.1)).abs() < 1e-15);
        assert!(isotropy_gap(&h, &u, &u, 2.0).is_err());
        assert!(isotropy_gap(&h, &u, &e(1, 3), 3.0).unwrap().abs() < 1e-15);
    }
}
