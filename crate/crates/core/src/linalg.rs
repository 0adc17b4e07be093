//! Dense Hermitian matrices (real symmetric or complex) and the handful of
//! factorizations the rest of the crate needs.
//!
//! All eigenvalue and Cholesky work is delegated to `faer`, pinned to
//! sequential execution so that results do not depend on the size of the
//! thread pool. Parallelism lives one level up, across independent trials.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance on `|H - H*|` accepted by the constructors.
pub const HERMITIAN_TOL: f64 = 1e-12;

static SEQUENTIAL: Once = Once::new();

fn pin_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// A dense Hermitian matrix. Real input stays real so that the common case
/// uses the cheaper real symmetric kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Hermitian {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl Hermitian {
    pub fn zeros(n: usize, complex: bool) -> Self {
        if complex {
            Hermitian::Complex(Mat::zeros(n, n))
        } else {
            Hermitian::Real(Mat::zeros(n, n))
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Hermitian::Real(Mat::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    /// Builds a real symmetric matrix from a row-major closure, checking symmetry.
    pub fn from_real_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_real(Mat::from_fn(n, n, f))
    }

    pub fn from_real(m: Mat<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Domain(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
        }
        let mut h = Hermitian::Real(m);
        h.enforce_hermitian()?;
        Ok(h)
    }

    pub fn from_complex(m: Mat<c64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Domain(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
        }
        let mut h = Hermitian::Complex(m);
        h.enforce_hermitian()?;
        Ok(h)
    }

    /// Rejects deviations above [`HERMITIAN_TOL`] and replaces the matrix by
    /// `(H + H*)/2` otherwise. Returns the relative deviation found.
    pub fn enforce_hermitian(&mut self) -> Result<f64> {
        let deviation = self.hermitian_deviation();
        if !(deviation <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { deviation });
        }
        if deviation > 0.0 {
            self.symmetrize();
        }
        Ok(deviation)
    }

    /// `max |H_ij - conj(H_ji)| / max(1, max |H_ij|)`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev = 0.0f64;
        let mut scale = 1.0f64;
        for j in 0..n {
            for i in 0..n {
                let a = self.get(i, j);
                let b = self.get(j, i).conj();
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return f64::INFINITY;
                }
                dev = dev.max((a - b).norm());
                scale = scale.max(a.norm());
            }
        }
        dev / scale
    }

    fn symmetrize(&mut self) {
        let n = self.dim();
        match self {
            Hermitian::Real(m) => {
                for j in 0..n {
                    for i in (j + 1)..n {
                        let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
            }
            Hermitian::Complex(m) => {
                for j in 0..n {
                    m[(j, j)] = c64::new(m[(j, j)].re, 0.0);
                    for i in (j + 1)..n {
                        let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                        m[(i, j)] = v;
                        m[(j, i)] = v.conj();
                    }
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Hermitian::Real(m) => m.nrows(),
            Hermitian::Complex(m) => m.nrows(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Hermitian::Complex(_))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            Hermitian::Real(m) => Complex64::new(m[(i, j)], 0.0),
            Hermitian::Complex(m) => m[(i, j)],
        }
    }

    /// Sets entry `(i, j)` to `v` and `(j, i)` to `conj(v)`. A real matrix is
    /// promoted to complex when `v` has a nonzero imaginary part.
    pub fn set_pair(&mut self, i: usize, j: usize, v: Complex64) {
        let v = if i == j { Complex64::new(v.re, 0.0) } else { v };
        if v.im != 0.0 {
            self.promote();
        }
        match self {
            Hermitian::Real(m) => {
                m[(i, j)] = v.re;
                m[(j, i)] = v.re;
            }
            Hermitian::Complex(m) => {
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
    }

    fn promote(&mut self) {
        if let Hermitian::Real(m) = self {
            let n = m.nrows();
            let c = Mat::from_fn(n, n, |i, j| c64::new(m[(i, j)], 0.0));
            *self = Hermitian::Complex(c);
        }
    }

    pub fn to_complex(&self) -> Mat<c64> {
        match self {
            Hermitian::Real(m) => Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0)),
            Hermitian::Complex(m) => m.clone(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        match self {
            Hermitian::Real(m) => Hermitian::Real(Mat::from_fn(m.nrows(), m.ncols(), |i, j| t * m[(i, j)])),
            Hermitian::Complex(m) => Hermitian::Complex(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * t)),
        }
    }

    pub fn add(&self, other: &Hermitian) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Domain(format!("dimension mismatch {} vs {}", self.dim(), other.dim())));
        }
        let n = self.dim();
        Ok(match (self, other) {
            (Hermitian::Real(a), Hermitian::Real(b)) => Hermitian::Real(Mat::from_fn(n, n, |i, j| a[(i, j)] + b[(i, j)])),
            _ => Hermitian::Complex(Mat::from_fn(n, n, |i, j| self.get(i, j) + other.get(i, j))),
        })
    }

    /// Adds `theta * u u*` in place.
    pub fn add_rank_one(&mut self, theta: f64, u: &[Complex64]) {
        assert_eq!(u.len(), self.dim());
        if u.iter().any(|z| z.im != 0.0) {
            self.promote();
        }
        let n = self.dim();
        match self {
            Hermitian::Real(m) => {
                for j in 0..n {
                    for i in 0..n {
                        m[(i, j)] += theta * u[i].re * u[j].re;
                    }
                }
            }
            Hermitian::Complex(m) => {
                for j in 0..n {
                    for i in 0..n {
                        m[(i, j)] += u[i] * u[j].conj() * theta;
                    }
                }
            }
        }
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        pin_sequential();
        if self.dim() == 0 {
            return Ok(Vec::new());
        }
        match self {
            Hermitian::Real(m) => m.self_adjoint_eigenvalues(Side::Lower),
            Hermitian::Complex(m) => m.self_adjoint_eigenvalues(Side::Lower),
        }
        .map_err(|e| Error::Eigen(format!("{e:?}")))
    }

    pub fn largest_eigenvalue(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        ev.last().copied().ok_or_else(|| Error::Domain("empty matrix".into()))
    }

    pub fn smallest_eigenvalue(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        ev.first().copied().ok_or_else(|| Error::Domain("empty matrix".into()))
    }

    /// Full eigendecomposition: eigenvalues ascending, eigenvectors as columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
        pin_sequential();
        let n = self.dim();
        match self {
            Hermitian::Real(m) => {
                let e = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
                let vals = (0..n).map(|i| e.S()[i]).collect();
                let vecs = (0..n)
                    .map(|k| (0..n).map(|i| Complex64::new(e.U()[(i, k)], 0.0)).collect())
                    .collect();
                Ok((vals, vecs))
            }
            Hermitian::Complex(m) => {
                let e = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
                let vals = (0..n).map(|i| e.S()[i].re).collect();
                let vecs = (0..n).map(|k| (0..n).map(|i| e.U()[(i, k)]).collect()).collect();
                Ok((vals, vecs))
            }
        }
    }

    /// `true` when `x I - H` is positive definite, i.e. `x > lambda_max(H)`.
    pub fn is_below(&self, x: f64) -> bool {
        self.shifted_factor(x).is_ok()
    }

    /// Cholesky factor of `x I - H`; fails unless `x` lies strictly above the spectrum.
    pub fn shifted_factor(&self, x: f64) -> Result<ShiftedFactor> {
        pin_sequential();
        let n = self.dim();
        let fail = |_| Error::InsideSpectrum { x, lambda_max: f64::NAN };
        match self {
            Hermitian::Real(m) => {
                let s = Mat::from_fn(n, n, |i, j| if i == j { x - m[(i, j)] } else { -m[(i, j)] });
                Ok(ShiftedFactor::Real(s.llt(Side::Lower).map_err(fail)?))
            }
            Hermitian::Complex(m) => {
                let s = Mat::from_fn(n, n, |i, j| if i == j { c64::new(x, 0.0) - m[(i, j)] } else { -m[(i, j)] });
                Ok(ShiftedFactor::Complex(s.llt(Side::Lower).map_err(fail)?))
            }
        }
    }
}

/// Cholesky factorization of `x I - H`, used to apply the resolvent.
pub enum ShiftedFactor {
    Real(faer::linalg::solvers::Llt<f64>),
    Complex(faer::linalg::solvers::Llt<c64>),
}

impl ShiftedFactor {
    /// Returns `(x I - H)^{-1} v` for each column `v`.
    pub fn solve(&self, rhs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let k = rhs.len();
        if k == 0 {
            return Vec::new();
        }
        let n = rhs[0].len();
        match self {
            ShiftedFactor::Real(llt) => {
                // real and imaginary parts are solved as separate columns
                let b = Mat::from_fn(n, 2 * k, |i, c| if c < k { rhs[c][i].re } else { rhs[c - k][i].im });
                let y = llt.solve(&b);
                (0..k)
                    .map(|c| (0..n).map(|i| Complex64::new(y[(i, c)], y[(i, c + k)])).collect())
                    .collect()
            }
            ShiftedFactor::Complex(llt) => {
                let b = Mat::from_fn(n, k, |i, c| rhs[c][i]);
                let y = llt.solve(&b);
                (0..k).map(|c| (0..n).map(|i| y[(i, c)]).collect()).collect()
            }
        }
    }
}

/// `<u, v> = sum conj(u_i) v_i`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Determinant of a small dense complex matrix by partial-pivot elimination.
pub fn determinant(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm()))
            .unwrap_or(col);
        if a[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in (col + 1)..n {
            let factor = a[r][col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col..n {
                let sub = a[col][c] * factor;
                a[r][c] -= sub;
            }
        }
    }
    det
}
