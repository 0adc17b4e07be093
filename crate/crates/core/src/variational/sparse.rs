use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Hermitian;

/// A finite Hermitian matrix stored by its nonzero upper-triangle entries.
///
/// The entry at `(j, i)` for `i < j` is implied as the conjugate of `(i, j)`.
/// Diagonal values are real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseHermitian {
    n: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl SparseHermitian {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("sparse matrix dimension must be at least 1".into()));
        }
        Ok(Self { n, entries: BTreeMap::new() })
    }

    /// Builds from `(i, j, value)` triples; lower-triangle triples are
    /// conjugated into the upper triangle.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Result<Self> {
        let mut m = Self::new(n)?;
        for (i, j, v) in entries {
            m.set(i, j, v)?;
        }
        Ok(m)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_entries(values.len(), values.iter().enumerate().map(|(i, &v)| (i, i, Complex64::new(v, 0.0))))
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::Domain(format!("index ({i},{j}) outside dimension {}", self.n)));
        }
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite entry at ({i},{j})")));
        }
        let (key, v) = if i <= j { ((i, j), v) } else { ((j, i), v.conj()) };
        if key.0 == key.1 && v.im != 0.0 {
            return Err(Error::Domain(format!("diagonal entry ({i},{i}) must be real, got {v}")));
        }
        if v == Complex64::new(0.0, 0.0) {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i <= j {
            self.entries.get(&(i, j)).copied().unwrap_or_default()
        } else {
            self.entries.get(&(j, i)).copied().unwrap_or_default().conj()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries `(i, j, value)` with `i <= j`, in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz_upper(&self) -> usize {
        self.entries.len()
    }

    /// Row indices carrying at least one nonzero entry, ascending.
    pub fn touched_rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = self.entries.keys().flat_map(|&(i, j)| [i, j]).collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut out = Self { n: self.n, entries: BTreeMap::new() };
        if t != 0.0 {
            out.entries = self.entries.iter().map(|(&k, &v)| (k, v * t)).collect();
        }
        out
    }

    pub fn to_dense(&self) -> Hermitian {
        let complex = self.entries.values().any(|v| v.im != 0.0);
        let mut h = Hermitian::zeros(self.n, complex);
        for (&(i, j), &v) in &self.entries {
            h.set_pair(i, j, v);
        }
        h
    }

    pub fn largest_eigenvalue(&self) -> Result<f64> {
        self.to_dense().largest_eigenvalue()
    }

    /// Dense row-major copy, mainly for reports.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }
}

impl std::fmt::Display for SparseHermitian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in self.to_rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|z| if z.im == 0.0 { format!("{:>10.6}", z.re) } else { format!("{:.4}{:+.4}i", z.re, z.im) })
                .collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}
