//! Independent reference computations used by the integration tests. None of
//! these call into the library's numerical routines.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Adaptive Simpson quadrature of a complex-valued integrand on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `int (1/2pi) sqrt(4 - t^2) g(t) dt` through `t = 2 cos(phi)`, which turns
/// the density into the smooth weight `(2/pi) sin^2(phi)` on `[0, pi]`.
pub fn semicircle_integral(g: &dyn Fn(f64) -> Complex64, tol: f64) -> Complex64 {
    let pi = std::f64::consts::PI;
    adaptive_simpson(&|phi: f64| (2.0 / pi) * phi.sin().powi(2) * g(2.0 * phi.cos()), 0.0, pi, tol)
}

/// Stieltjes transform of the semicircle by quadrature.
pub fn stieltjes_quadrature(z: Complex64) -> Complex64 {
    semicircle_integral(&|t| 1.0 / (z - t), 1e-13)
}

/// Cyclic Jacobi eigenvalue iteration for a real symmetric matrix (row-major).
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Inverse of a dense complex matrix by Gauss-Jordan elimination.
pub fn dense_inverse(a: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| m[r][col].norm().total_cmp(&m[s][col].norm())).unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f.norm() != 0.0 {
                    let pivot_row = m[col].clone();
                    for (v, pv) in m[r].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Random real symmetric matrix with entries uniform in `[-s, s]`.
pub fn random_symmetric(n: usize, s: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-s..s);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// `k` orthonormal real vectors of dimension `n` via Gram-Schmidt.
pub fn random_orthonormal(n: usize, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for u in &out {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-6 {
            out.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    out
}

/// Maximizes `q` over nonnegative `y` with `sum y_i^delta = 1` by
/// enumerating supports, starting from the equal-weight point on each, and
/// refining with shrinking multiplicative random perturbations.
pub fn lp_sphere_max(dim: usize, delta: f64, q: &dyn Fn(&[f64]) -> f64, rng: &mut impl Rng) -> f64 {
    let project = |y: &mut Vec<f64>| {
        let s: f64 = y.iter().map(|v| v.powf(delta)).sum();
        let scale = s.powf(-1.0 / delta);
        y.iter_mut().for_each(|v| *v *= scale);
    };
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << dim) {
        let mut y: Vec<f64> = (0..dim).map(|i| if mask >> i & 1 == 1 { 1.0 } else { 0.0 }).collect();
        project(&mut y);
        let mut val = q(&y);
        let mut step = 0.3;
        let mut rounds = 0;
        while step > 1e-8 && rounds < 3000 {
            rounds += 1;
            let mut improved = false;
            for _ in 0..30 {
                let mut z: Vec<f64> = y
                    .iter()
                    .map(|&v| if v > 0.0 { v * (1.0 + step * rng.random_range(-1.0..1.0)) } else { 0.0 })
                    .collect();
                project(&mut z);
                let qz = q(&z);
                if qz > val {
                    // gains at rounding level do not count as progress
                    improved |= qz > val + 1e-14 * val.abs();
                    val = qz;
                    y = z;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(val);
    }
    best
}

/// Dense grid maximum of `q` over `x, y >= 0` with `x^delta + y^delta = 1`.
pub fn lp_arc_grid_max(delta: f64, q: &dyn Fn(f64, f64) -> f64, points: usize) -> f64 {
    (0..=points)
        .map(|k| {
            let s = k as f64 / points as f64;
            let x = s.powf(1.0 / delta);
            let y = (1.0 - s).powf(1.0 / delta);
            q(x, y)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for k in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=p.len()).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Quotient distance by brute force: both matrices padded with zeros to
/// `na + nb`, one relabeling applied to `a` only (applying one to each is
/// equivalent), maximum entrywise modulus difference.
pub fn quotient_distance_bruteforce(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    let d = a.len() + b.len();
    let pad = |m: &[Vec<Complex64>]| {
        let mut out = vec![vec![Complex64::default(); d]; d];
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out[i][j] = *v;
            }
        }
        out
    };
    let (pa, pb) = (pad(a), pad(b));
    permutations(d)
        .into_iter()
        .map(|s| {
            let mut worst = 0.0f64;
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((pa[s[i]][s[j]] - pb[i][j]).norm());
                }
            }
            worst
        })
        .fold(f64::INFINITY, f64::min)
}
