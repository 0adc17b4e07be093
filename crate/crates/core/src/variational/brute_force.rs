//! Numerical search for the variational constant over small matrices.
//!
//! A support pattern fixes the size, which entries are nonzero and their
//! phases. For each pattern the scale-free objective
//! `ln I(A) - alpha ln lambda_max(A)` is minimized over log-magnitudes by
//! multi-start BFGS; at a minimizer `A / lambda_max(A)` is admissible and has
//! weight `exp(objective)`.

use std::collections::HashSet;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sparse::SparseHermitian;
use crate::error::{Error, Result};
use crate::heavy_tail::TailParams;
use crate::linalg::Hermitian;
use crate::rng::substream;

/// Largest matrix size searched.
pub const MAX_N: usize = 6;

/// Sizes up to this one have every support pattern enumerated.
pub const EXHAUSTIVE_N: usize = 3;

/// Smallest top eigenvalue, relative to the largest entry, that the search
/// trusts; below it the eigensolver's rounding dominates.
const RESOLVED: f64 = 1e-8;

/// Magnitude cap, far below the range where squared entries overflow inside
/// the eigensolver.
const MAX_SCALE: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceBudget {
    /// Random starting points per pattern.
    pub restarts: usize,
    pub seed: u64,
    /// Random connected patterns drawn per size above [`EXHAUSTIVE_N`].
    pub sampled_patterns: usize,
    /// BFGS iteration cap per start.
    pub max_iter: usize,
    /// Stop a local search once successive objective values differ by less.
    pub tol: f64,
}

impl Default for BruteForceBudget {
    fn default() -> Self {
        Self { restarts: 32, seed: 0x5eed, sampled_patterns: 24, max_iter: 300, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub c_est: f64,
    pub argmin: SparseHermitian,
    pub patterns_searched: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Pattern {
    n: usize,
    /// `(i, j, phase)` with `i <= j`.
    slots: Vec<(usize, usize, Complex64)>,
}

impl Pattern {
    fn is_connected(&self) -> bool {
        if self.n == 1 {
            return !self.slots.is_empty();
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(i, j, _) in &self.slots {
                if i == j {
                    continue;
                }
                let w = if i == v {
                    j
                } else if j == v {
                    i
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn canonical_key(&self) -> Vec<(usize, usize, i64, i64)> {
        let q = |x: f64| (x * 1e6).round() as i64;
        permutations(self.n)
            .into_iter()
            .map(|sigma| {
                let mut key: Vec<_> = self
                    .slots
                    .iter()
                    .map(|&(i, j, z)| {
                        let (p, r) = (sigma[i], sigma[j]);
                        if p <= r {
                            (p, r, q(z.re), q(z.im))
                        } else {
                            (r, p, q(z.re), q(-z.im))
                        }
                    })
                    .collect();
                key.sort_unstable();
                key
            })
            .min()
            .unwrap_or_default()
    }

    fn matrix(&self, mags: &[f64]) -> Hermitian {
        let complex = self.slots.iter().any(|s| s.2.im != 0.0);
        let mut h = Hermitian::zeros(self.n, complex);
        for (&(i, j, z), &r) in self.slots.iter().zip(mags) {
            h.set_pair(i, j, z * r);
        }
        h
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn off_slots(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

/// Every connected pattern of size `n`, one representative per relabeling class.
fn enumerate_patterns(n: usize, params: &TailParams) -> Vec<Pattern> {
    let mut diag_opts: Vec<Option<Complex64>> = vec![None];
    diag_opts.extend(params.nu1_support.iter().copied().map(Some));
    let mut off_opts: Vec<Option<Complex64>> = vec![None];
    off_opts.extend(params.nu2_support.iter().copied().map(Some));
    let offs = off_slots(n);
    let total_slots = n + offs.len();
    let radix: Vec<usize> = (0..total_slots).map(|k| if k < n { diag_opts.len() } else { off_opts.len() }).collect();
    let count: usize = radix.iter().product();

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mut code in 0..count {
        let mut slots = Vec::new();
        for (k, &r) in radix.iter().enumerate() {
            let digit = code % r;
            code /= r;
            let (opt, (i, j)) = if k < n { (diag_opts[digit], (k, k)) } else { (off_opts[digit], offs[k - n]) };
            if let Some(z) = opt {
                slots.push((i, j, z));
            }
        }
        let p = Pattern { n, slots };
        if p.is_connected() && seen.insert(p.canonical_key()) {
            out.push(p);
        }
    }
    out
}

/// Uniform patterns (every diagonal slot alike, every off-diagonal slot alike)
/// plus random connected ones.
fn sampled_patterns(n: usize, params: &TailParams, budget: &BruteForceBudget) -> Vec<Pattern> {
    let offs = off_slots(n);
    let mut out = Vec::new();
    let mut diag_opts: Vec<Option<Complex64>> = vec![None];
    diag_opts.extend(params.nu1_support.iter().copied().map(Some));
    for &d in &diag_opts {
        for &o in &params.nu2_support {
            let mut slots: Vec<_> = match d {
                Some(z) => (0..n).map(|i| (i, i, z)).collect(),
                None => Vec::new(),
            };
            slots.extend(offs.iter().map(|&(i, j)| (i, j, o)));
            out.push(Pattern { n, slots });
        }
    }
    let mut rng = substream(budget.seed, (1u64 << 48) | n as u64);
    let mut drawn = 0;
    while drawn < budget.sampled_patterns {
        let mut slots = Vec::new();
        for i in 0..n {
            if rng.random::<f64>() < 0.5 {
                let z = params.nu1_support[rng.random_range(0..params.nu1_support.len())];
                slots.push((i, i, z));
            }
        }
        for &(i, j) in &offs {
            if rng.random::<f64>() < 0.6 {
                let z = params.nu2_support[rng.random_range(0..params.nu2_support.len())];
                slots.push((i, j, z));
            }
        }
        slots.sort_by_key(|s| (s.0, s.1));
        let p = Pattern { n, slots };
        if p.is_connected() {
            out.push(p);
            drawn += 1;
        }
    }
    out
}

/// Objective and gradient over the free log-magnitudes; the first slot is
/// pinned at magnitude 1 since the objective is scale invariant.
struct Objective<'a> {
    pattern: &'a Pattern,
    weights: Vec<f64>,
    alpha: f64,
}

impl Objective<'_> {
    fn mags(&self, free: &[f64]) -> Vec<f64> {
        std::iter::once(1.0).chain(free.iter().map(|m| m.exp())).collect()
    }

    /// `None` when the top eigenvalue is not positive, or too small against
    /// the largest entry to be resolved by the eigensolver.
    fn eval(&self, free: &[f64]) -> Option<(f64, Vec<f64>)> {
        let mags = self.mags(free);
        let scale = mags.iter().fold(0.0f64, |m, &r| m.max(r));
        if !(scale < MAX_SCALE) {
            return None;
        }
        let h = self.pattern.matrix(&mags);
        let (vals, vecs) = h.eigen().ok()?;
        let lambda = *vals.last()?;
        if !(lambda > RESOLVED * scale * self.pattern.n as f64 && lambda.is_finite()) {
            return None;
        }
        let x = vecs.last()?;
        let terms: Vec<f64> = self.weights.iter().zip(&mags).map(|(w, r)| w * r.powf(self.alpha)).collect();
        let total: f64 = terms.iter().sum();
        let f = total.ln() - self.alpha * lambda.ln();
        let grad = self.pattern.slots[1..]
            .iter()
            .zip(&terms[1..])
            .zip(&mags[1..])
            .map(|((&(i, j, z), t), r)| {
                let dl = if i == j { z.re * x[i].norm_sqr() } else { 2.0 * (x[i].conj() * z * x[j]).re };
                self.alpha * t / total - self.alpha * r * dl / lambda
            })
            .collect();
        Some((f, grad))
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// BFGS with backtracking Armijo line search. Returns the final point and value.
fn bfgs(obj: &Objective<'_>, x0: Vec<f64>, budget: &BruteForceBudget) -> Option<(Vec<f64>, f64)> {
    const MAX_STEP: f64 = 4.0;
    let dim = x0.len();
    let (mut f, mut g) = obj.eval(&x0)?;
    let mut x = x0;
    let mut h = identity(dim);
    for _ in 0..budget.max_iter {
        let mut p: Vec<f64> = (0..dim).map(|r| -dot(&h[r], &g)).collect();
        if dot(&p, &g) >= 0.0 {
            h = identity(dim);
            p = g.iter().map(|v| -v).collect();
        }
        let slope = dot(&p, &g);
        let pmax = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if pmax == 0.0 {
            break;
        }
        let mut step = (MAX_STEP / pmax).min(1.0);
        let mut accepted = None;
        for _ in 0..50 {
            let xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + step * b).collect();
            if let Some((fn_, gn)) = obj.eval(&xn) {
                if fn_ <= f + 1e-4 * step * slope {
                    accepted = Some((xn, fn_, gn));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 {
            let hy: Vec<f64> = (0..dim).map(|r| dot(&h[r], &y)).collect();
            let yhy = dot(&y, &hy);
            for r in 0..dim {
                for c in 0..dim {
                    h[r][c] += ((sy + yhy) * s[r] * s[c]) / (sy * sy) - (hy[r] * s[c] + s[r] * hy[c]) / sy;
                }
            }
        }
        let done = (f - fn_).abs() < budget.tol || gn.iter().all(|v| v.abs() < 1e-10);
        x = xn;
        f = fn_;
        g = gn;
        if done {
            break;
        }
    }
    Some((x, f))
}

fn identity(dim: usize) -> Vec<Vec<f64>> {
    (0..dim).map(|r| (0..dim).map(|c| if r == c { 1.0 } else { 0.0 }).collect()).collect()
}

struct PatternBest {
    value: f64,
    mags: Vec<f64>,
}

fn search_pattern(
    pattern: &Pattern,
    index: usize,
    params: &TailParams,
    budget: &BruteForceBudget,
) -> Option<PatternBest> {
    let obj = Objective {
        pattern,
        weights: pattern.slots.iter().map(|&(i, j, _)| if i == j { params.b } else { params.a }).collect(),
        alpha: params.alpha,
    };
    let dim = pattern.slots.len() - 1;
    let mut best: Option<PatternBest> = None;
    let restarts = if dim == 0 { 1 } else { budget.restarts };
    for r in 0..restarts {
        let mut rng = substream(budget.seed, ((index as u64) << 16) | r as u64);
        let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let Some((x, f)) = bfgs(&obj, x0, budget) else { continue };
        if best.as_ref().is_none_or(|b| f < b.value) {
            best = Some(PatternBest { value: f, mags: obj.mags(&x) });
        }
    }
    best
}

/// Estimates `c = inf { I(A) : lambda_max(A) = 1, A admissible }` over
/// matrices of size at most `max_n`.
pub fn brute_force_c(params: &TailParams, max_n: usize, budget: &BruteForceBudget) -> Result<BruteForceResult> {
    params.validate()?;
    if max_n == 0 || max_n > MAX_N {
        return Err(Error::InvalidParams(format!("max_n must lie in 1..={MAX_N}, got {max_n}")));
    }
    if budget.restarts == 0 {
        return Err(Error::InvalidParams("at least one restart is required".into()));
    }
    let mut patterns = Vec::new();
    for n in 1..=max_n {
        if n <= EXHAUSTIVE_N {
            patterns.extend(enumerate_patterns(n, params));
        } else {
            patterns.extend(sampled_patterns(n, params, budget));
        }
    }
    let results: Vec<Option<PatternBest>> = patterns
        .par_iter()
        .enumerate()
        .map(|(k, p)| search_pattern(p, k, params, budget))
        .collect();

    let mut best: Option<(f64, usize, &PatternBest)> = None;
    for (k, r) in results.iter().enumerate() {
        if let Some(r) = r {
            if best.is_none_or(|(v, _, _)| r.value < v) {
                best = Some((r.value, k, r));
            }
        }
    }
    let (value, k, pb) = best.ok_or_else(|| Error::Infeasible("no support pattern has a positive top eigenvalue".into()))?;
    let pattern = &patterns[k];
    let lambda = pattern.matrix(&pb.mags).largest_eigenvalue()?;
    let mut argmin = SparseHermitian::new(pattern.n)?;
    for (&(i, j, z), &r) in pattern.slots.iter().zip(&pb.mags) {
        argmin.set(i, j, z * (r / lambda))?;
    }
    Ok(BruteForceResult { c_est: value.exp(), argmin, patterns_searched: patterns.len() })
}
