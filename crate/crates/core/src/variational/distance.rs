//! Distance between finite Hermitian matrices modulo simultaneous relabeling
//! of rows and columns, with zero padding to a common dimension.

use super::sparse::SparseHermitian;
use crate::error::{Error, Result};

/// Largest number of touched rows accepted by [`perm_invariant_distance`].
pub const MAX_TOUCHED_ROWS: usize = 8;

/// Compressed view on the touched rows: dense entries indexed by position.
struct Compact {
    m: usize,
    vals: Vec<num_complex::Complex64>,
}

impl Compact {
    fn new(a: &SparseHermitian) -> Result<Self> {
        let rows = a.touched_rows();
        if rows.len() > MAX_TOUCHED_ROWS {
            return Err(Error::SupportTooLarge { rows: rows.len(), limit: MAX_TOUCHED_ROWS });
        }
        let m = rows.len();
        let mut vals = vec![num_complex::Complex64::default(); m * m];
        for (p, &i) in rows.iter().enumerate() {
            for (q, &j) in rows.iter().enumerate() {
                vals[p * m + q] = a.get(i, j);
            }
        }
        Ok(Self { m, vals })
    }

    fn at(&self, p: usize, q: usize) -> num_complex::Complex64 {
        self.vals[p * self.m + q]
    }
}

struct Search<'a> {
    a: &'a Compact,
    b: &'a Compact,
    /// `assign[p] = Some(q)` maps row `p` of `a` onto row `q` of `b`.
    assign: Vec<Option<usize>>,
    used: Vec<bool>,
    best: f64,
}

impl Search<'_> {
    /// Cost contributed by row `p` of `a` against all rows assigned before it.
    fn row_cost(&self, p: usize) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..=p {
            let d = match (self.assign[p], self.assign[r]) {
                (Some(q), Some(s)) => (self.a.at(p, r) - self.b.at(q, s)).norm(),
                _ => self.a.at(p, r).norm(),
            };
            worst = worst.max(d);
        }
        worst
    }

    /// Entries of `b` touching a row outside the image are compared with zero.
    fn leftover_cost(&self) -> f64 {
        let mut worst = 0.0f64;
        for q in 0..self.b.m {
            if self.used[q] {
                for s in 0..self.b.m {
                    if !self.used[s] {
                        worst = worst.max(self.b.at(q, s).norm());
                    }
                }
            } else {
                for s in 0..self.b.m {
                    worst = worst.max(self.b.at(q, s).norm());
                }
            }
        }
        worst
    }

    fn run(&mut self, p: usize, acc: f64) {
        if acc >= self.best {
            return;
        }
        if p == self.a.m {
            let total = acc.max(self.leftover_cost());
            if total < self.best {
                self.best = total;
            }
            return;
        }
        for q in 0..self.b.m {
            if self.used[q] {
                continue;
            }
            self.used[q] = true;
            self.assign[p] = Some(q);
            let c = self.row_cost(p);
            self.run(p + 1, acc.max(c));
            self.used[q] = false;
        }
        self.assign[p] = None;
        let c = self.row_cost(p);
        self.run(p + 1, acc.max(c));
    }
}

/// `min_{sigma, sigma'} max_{i,j} |A_{sigma(i) sigma(j)} - B_{sigma'(i) sigma'(j)}|`
/// with both matrices padded by zeros to a common dimension.
///
/// Exact search over partial matchings of touched rows; each matrix may touch
/// at most [`MAX_TOUCHED_ROWS`] rows.
pub fn perm_invariant_distance(a: &SparseHermitian, b: &SparseHermitian) -> Result<f64> {
    let ca = Compact::new(a)?;
    let cb = Compact::new(b)?;
    let mut s = Search {
        a: &ca,
        b: &cb,
        assign: vec![None; ca.m],
        used: vec![false; cb.m],
        best: f64::INFINITY,
    };
    s.run(0, 0.0);
    Ok(s.best)
}
