//! The variational constant `c`: the infimum of
//! `I(A) = b sum_i |A_ii|^alpha + a sum_{i<j} |A_ij|^alpha` over finite
//! Hermitian matrices with top eigenvalue 1 whose entry phases lie in the
//! declared angle supports.

mod brute_force;
mod closed_form;
mod distance;
mod lemmas;
mod sparse;

pub use brute_force::{brute_force_c, BruteForceBudget, BruteForceResult, EXHAUSTIVE_N, MAX_N};
pub use closed_form::{
    classify, closed_form_c, in_domain, phi, psi, t0, t1, weight_i, Case, ClosedForm, ExtremalMatrixFamily,
};
pub use distance::{perm_invariant_distance, MAX_TOUCHED_ROWS};
pub use lemmas::{psd_offdiag_max, quadform_max_bipartite, quadform_max_simplex};
pub use sparse::SparseHermitian;

use serde::{Deserialize, Serialize};

use crate::heavy_tail::TailParams;

/// One nonzero upper-triangle entry of an exported witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

/// JSON form of a minimizing matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessExport {
    pub size: usize,
    pub entries: Vec<WitnessEntry>,
    pub weight: f64,
    pub case: Option<Case>,
}

impl WitnessExport {
    pub fn new(m: &SparseHermitian, params: &TailParams, case: Option<Case>) -> Self {
        Self {
            size: m.n(),
            entries: m.entries().map(|(i, j, v)| WitnessEntry { i, j, re: v.re, im: v.im }).collect(),
            weight: weight_i(m, params),
            case,
        }
    }

    pub fn to_matrix(&self) -> crate::Result<SparseHermitian> {
        SparseHermitian::from_entries(
            self.size,
            self.entries.iter().map(|e| (e.i, e.j, num_complex::Complex64::new(e.re, e.im))),
        )
    }
}
