//! Numerical laboratory for the largest eigenvalue of Wigner matrices with
//! stretched-exponential entries.
//!
//! - [`semicircle`]: density, Stieltjes transform and the rate function `J`.
//! - [`heavy_tail`]: entry laws, Wigner sampling and the size decomposition.
//! - [`variational`]: the constant `c` (closed forms, brute-force oracle,
//!   quadratic-form lemmas, permutation-quotient distance).
//! - [`spike`]: the finite-rank eigenvalue equation and BBP outlier map.
//! - [`experiments`]: seeded Monte Carlo campaigns and experiment records.

// `!(x >= y)` guards are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod heavy_tail;
pub mod linalg;
pub mod matrix_io;
pub mod rng;
pub mod semicircle;
pub mod spike;
pub mod variational;

pub use error::{Error, Result};
