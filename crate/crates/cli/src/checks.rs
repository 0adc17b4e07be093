//! The `check` command: a fast pass over the library's invariants, each
//! compared against a small independent computation.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use htldp::experiments::{bennett_check, concentration_check};
use htldp::heavy_tail::{decompose, sample_wigner, DecompositionThresholds, EntryLaw, EntrySampler, TailParams};
use htldp::linalg::Hermitian;
use htldp::rng::substream;
use htldp::semicircle::{rate_j, stieltjes, stieltjes_complex, stieltjes_inverse, RateFunctionParams};
use htldp::spike::{EigenEquation, SpikeSpec};
use htldp::variational::{
    brute_force_c, closed_form_c, in_domain, perm_invariant_distance, psd_offdiag_max, quadform_max_bipartite,
    quadform_max_simplex, weight_i, BruteForceBudget, SparseHermitian,
};

use crate::CliError;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

type Check = fn(u64) -> Result<(bool, String), htldp::Error>;

pub fn run(seed: u64) -> Result<(), CliError> {
    let checks: [(&'static str, Check); 11] = [
        ("stieltjes inverse round trip", stieltjes_round_trip),
        ("stieltjes transform vs quadrature", stieltjes_quadrature),
        ("rate function shape", rate_shape),
        ("closed-form witnesses", witnesses),
        ("closed form vs brute force", oracle_agreement),
        ("quadratic-form lemmas vs search", lemmas),
        ("eigenvalue equation vs eigensolver", eigen_equation),
        ("decomposition reconstruction", decomposition),
        ("Weyl inequalities", weyl),
        ("concentration and Bennett bounds", bounds),
        ("quotient distance triangle inequality", triangle),
    ];
    let mut outcomes = Vec::new();
    for (name, f) in checks {
        let t = Instant::now();
        let (pass, detail) = match f(seed) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        println!("{} {name}: {detail} ({:.1}s)", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
        outcomes.push(Outcome { name, pass, detail });
    }
    let failed: Vec<&Outcome> = outcomes.iter().filter(|o| !o.pass).collect();
    if failed.is_empty() {
        println!("all {} checks passed", outcomes.len());
        Ok(())
    } else {
        let names: Vec<String> = failed.iter().map(|o| format!("{} ({})", o.name, o.detail)).collect();
        Err(CliError::Disagreement(names.join("; ")))
    }
}

fn stieltjes_round_trip(_: u64) -> Result<(bool, String), htldp::Error> {
    let mut worst = 0.0f64;
    for k in 0..10_000 {
        let x = 2.0 + 48.0 * k as f64 / 9_999.0;
        worst = worst.max((stieltjes_inverse(stieltjes(x)?)? - x).abs());
    }
    Ok((worst < 1e-12, format!("max error {worst:.2e}")))
}

/// `int rho(t) / (z - t) dt` with `t = 2 cos(phi)`, so the weight becomes
/// `(2/pi) sin^2(phi)` on `[0, pi]`; composite Simpson rule.
fn quadrature(z: Complex64) -> Complex64 {
    let m = 20_000;
    let h = std::f64::consts::PI / m as f64;
    let mut acc = Complex64::default();
    for k in 0..=m {
        let phi = k as f64 * h;
        let w = if k == 0 || k == m {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (2.0 / std::f64::consts::PI) * phi.sin().powi(2) / (z - 2.0 * phi.cos());
    }
    acc * h / 3.0
}

fn stieltjes_quadrature(_: u64) -> Result<(bool, String), htldp::Error> {
    let pts = [
        Complex64::new(0.0, 1.0),
        Complex64::new(10.0, 0.0),
        Complex64::new(-3.0, 0.5),
        Complex64::new(2.5, -0.7),
        Complex64::new(1.0, 2.0),
    ];
    let mut worst = 0.0f64;
    for z in pts {
        worst = worst.max((stieltjes_complex(z)? - quadrature(z)).norm());
    }
    Ok((worst < 1e-8, format!("max error {worst:.2e}")))
}

fn rate_shape(seed: u64) -> Result<(bool, String), htldp::Error> {
    let mut rng = substream(seed, 1);
    let mut ok = true;
    for _ in 0..10 {
        let p = RateFunctionParams::new(rng.random_range(0.1..1.9), rng.random_range(0.1..5.0))?;
        ok &= rate_j(2.0, &p) == 0.0 && rate_j(1.999, &p) == f64::INFINITY;
        ok &= (rate_j(2.0 + 1e-12, &p) - p.c()).abs() < 1e-4 * p.c();
        let mut prev = rate_j(2.0 + 1e-9, &p);
        for k in 1..2000 {
            let v = rate_j(2.0 + 1e-9 + k as f64 * 0.02, &p);
            ok &= v > prev;
            prev = v;
        }
    }
    Ok((ok, "10 draws".into()))
}

fn sample_configs(seed: u64) -> Vec<TailParams> {
    let mut rng = substream(seed, 2);
    let mut out = Vec::new();
    let r = |rng: &mut htldp::rng::Stream, lo: f64, hi: f64| rng.random_range(lo..hi);
    out.push(TailParams::real(r(&mut rng, 0.3, 1.0), r(&mut rng, 0.5, 2.0), r(&mut rng, 0.5, 2.0), &[1.0], &[1.0, -1.0]).unwrap());
    let a = r(&mut rng, 0.5, 2.0);
    out.push(TailParams::real(r(&mut rng, 1.1, 1.8), a, a * r(&mut rng, 0.1, 0.5), &[1.0], &[-1.0]).unwrap());
    out.push(TailParams::real(r(&mut rng, 1.1, 1.7), r(&mut rng, 0.5, 2.0), r(&mut rng, 0.5, 2.0), &[1.0], &[1.0]).unwrap());
    out.push(TailParams::real(r(&mut rng, 1.1, 1.7), r(&mut rng, 0.5, 2.0), r(&mut rng, 0.5, 2.0), &[1.0], &[-1.0]).unwrap());
    out.push(TailParams::real(r(&mut rng, 1.1, 1.7), r(&mut rng, 0.5, 2.0), r(&mut rng, 0.5, 2.0), &[-1.0], &[1.0]).unwrap());
    out.push(TailParams::real(r(&mut rng, 1.1, 1.9), r(&mut rng, 0.5, 2.0), r(&mut rng, 0.5, 2.0), &[-1.0], &[-1.0]).unwrap());
    out
}

fn witnesses(seed: u64) -> Result<(bool, String), htldp::Error> {
    let mut ok = true;
    for p in sample_configs(seed) {
        let cf = closed_form_c(&p)?;
        ok &= (cf.witness.largest_eigenvalue()? - 1.0).abs() <= 1e-10;
        ok &= in_domain(&cf.witness, &p);
        ok &= (weight_i(&cf.witness, &p) - cf.c).abs() <= 1e-10 * cf.c.max(1.0);
    }
    Ok((ok, "one draw per case".into()))
}

fn oracle_agreement(seed: u64) -> Result<(bool, String), htldp::Error> {
    let budget = BruteForceBudget { restarts: 8, sampled_patterns: 8, seed, ..Default::default() };
    let mut worst = 0.0f64;
    for p in sample_configs(seed) {
        let cf = closed_form_c(&p)?;
        let bf = brute_force_c(&p, 5, &budget)?;
        worst = worst.max((cf.c - bf.c_est).abs() / cf.c);
    }
    Ok((worst <= 1e-3, format!("max relative gap {worst:.2e}")))
}

/// Random search plus coordinate refinement on the nonnegative
/// `l^delta` sphere for the objective `q`.
fn sphere_search(dim: usize, delta: f64, q: impl Fn(&[f64]) -> f64, rng: &mut htldp::rng::Stream) -> f64 {
    let project = |y: &mut [f64]| {
        let s: f64 = y.iter().map(|v| v.powf(delta)).sum();
        let scale = s.powf(-1.0 / delta);
        y.iter_mut().for_each(|v| *v *= scale);
    };
    let mut best = f64::NEG_INFINITY;
    // supports of every size with equal weights, then random perturbation
    for mask in 1u32..(1 << dim) {
        let mut y: Vec<f64> = (0..dim).map(|i| if mask >> i & 1 == 1 { 1.0 } else { 0.0 }).collect();
        project(&mut y);
        let mut val = q(&y);
        let mut step = 0.2;
        let mut rounds = 0;
        while step > 1e-7 && rounds < 2000 {
            rounds += 1;
            let mut improved = false;
            for _ in 0..20 {
                let mut z: Vec<f64> = y
                    .iter()
                    .map(|&v| if v > 0.0 { (v * (1.0 + step * rng.random_range(-1.0..1.0))).max(1e-300) } else { 0.0 })
                    .collect();
                project(&mut z);
                let qz = q(&z);
                if qz > val {
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

fn lemmas(seed: u64) -> Result<(bool, String), htldp::Error> {
    let mut rng = substream(seed, 3);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mu = rng.random_range(0.5..2.0);
        let lambda = rng.random_range(0.0..mu);
        let delta = rng.random_range(0.3..0.95);
        let n = rng.random_range(1..=4usize);
        let q = |y: &[f64]| {
            let mut s = 0.0;
            for i in 0..y.len() {
                for j in 0..y.len() {
                    s += if i == j { lambda } else { mu } * y[i] * y[j];
                }
            }
            s
        };
        let search = sphere_search(n, delta, q, &mut rng);
        worst = worst.max((search - quadform_max_simplex(lambda, mu, delta, n)?).abs());

        let bq = |y: &[f64]| lambda * (y[0] * y[0] + y[1] * y[1]) + 2.0 * mu * y[0] * y[1];
        let search = sphere_search(2, delta, bq, &mut rng);
        worst = worst.max((search - quadform_max_bipartite(lambda, mu, delta)?).abs());

        // rank-one trace-one X = x x^T with x on the unit l^2 sphere
        let beta = rng.random_range(2.0..4.0);
        let m = rng.random_range(2..=4usize);
        let off = |x: &[f64]| {
            let mut s = 0.0;
            for i in 0..x.len() {
                for j in 0..x.len() {
                    if i != j {
                        s += (x[i] * x[j]).abs().powf(beta);
                    }
                }
            }
            s
        };
        // y_i = x_i^2 lives on the l^1 simplex; reuse the sphere search with delta = 1 - tiny
        let search = sphere_search(m, 1.0 - 1e-12, |y| off(&y.iter().map(|v| v.sqrt()).collect::<Vec<_>>()), &mut rng);
        worst = worst.max((search - psd_offdiag_max(beta, m)?).abs());
    }
    Ok((worst < 1e-4, format!("max error {worst:.2e}")))
}

fn random_symmetric(n: usize, rng: &mut htldp::rng::Stream) -> Hermitian {
    let mut vals = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            vals[i * n + j] = v;
            vals[j * n + i] = v;
        }
    }
    Hermitian::from_real_fn(n, |i, j| vals[i * n + j] / (n as f64).sqrt()).expect("symmetric")
}

fn eigen_equation(seed: u64) -> Result<(bool, String), htldp::Error> {
    let mut rng = substream(seed, 4);
    let mut worst = 0.0f64;
    let mut used = 0;
    for _ in 0..20 {
        let n = rng.random_range(5..=60usize);
        let h = random_symmetric(n, &mut rng);
        let k = rng.random_range(1..=3usize.min(n));
        let mut thetas: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..4.0)).collect();
        thetas.sort_by(f64::total_cmp);
        // orthonormal vectors from Gram-Schmidt on random directions
        let mut vs: Vec<Vec<Complex64>> = Vec::new();
        while vs.len() < k {
            let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
            for u in &vs {
                let d = htldp::linalg::inner(u, &v);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
            }
            let nv = htldp::linalg::norm(&v);
            v.iter_mut().for_each(|a| *a /= nv);
            vs.push(v);
        }
        let spike = SpikeSpec::new(thetas, vs)?;
        let eq = EigenEquation::new(h.clone(), spike.clone())?;
        let direct = h.add(&spike.perturbation())?.largest_eigenvalue()?;
        if direct > eq.lambda_max() + 1e-6 {
            used += 1;
            match eq.largest_zero()? {
                Some(z) => worst = worst.max((z - direct).abs()),
                None => worst = f64::INFINITY,
            }
        }
    }
    Ok((worst < 1e-8, format!("{used} detached instances, max error {worst:.2e}")))
}

fn decomposition(seed: u64) -> Result<(bool, String), htldp::Error> {
    let params = TailParams::real(0.5, 1.0, 1.0, &[1.0, -1.0], &[1.0, -1.0])?;
    let sampler = EntrySampler::new(&params, EntryLaw::Weibull)?;
    let th = DecompositionThresholds::new(0.5, 2.5, 0.5)?;
    let mut ok = true;
    for s in 0..10 {
        let n = 40;
        let mut sample = sample_wigner(n, &sampler, &mut substream(seed, 100 + s))?;
        let (a, b, c) = th.cutoffs(n);
        let raw = sample.raw_mut();
        for (k, v) in [a, b, c].into_iter().enumerate() {
            raw.set_pair(k, k + 1, Complex64::new(v, 0.0));
        }
        let dec = decompose(&sample, &th)?;
        let sum = dec.sum()?;
        let orig = sample.normalized();
        for i in 0..n {
            for j in 0..n {
                ok &= sum.get(i, j) == orig.get(i, j);
            }
        }
    }
    Ok((ok, "10 samples with boundary entries".into()))
}

fn weyl(seed: u64) -> Result<(bool, String), htldp::Error> {
    let mut rng = substream(seed, 5);
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(1..=20usize);
        let a = random_symmetric(n, &mut rng);
        let e = random_symmetric(n, &mut rng);
        let top = a.add(&e)?.largest_eigenvalue()?;
        let (la, le, me) = (a.largest_eigenvalue()?, e.largest_eigenvalue()?, e.smallest_eigenvalue()?);
        ok &= top <= la + le + 1e-10 && top >= la + me - 1e-10;
    }
    Ok((ok, "100 pairs".into()))
}

fn bounds(seed: u64) -> Result<(bool, String), htldp::Error> {
    let n = 100;
    let conc = concentration_check(n, 1.0 / (n as f64).sqrt(), &[0.0, 0.05, 0.1, 0.2, 0.5], 300, seed)?;
    let ben = bennett_check(200, 0.1, &[0.0, 2.0, 5.0, 10.0, 15.0], 2000, seed)?;
    let ok = conc.iter().chain(&ben).all(|r| r.holds);
    Ok((ok, format!("{} rows", conc.len() + ben.len())))
}

fn triangle(seed: u64) -> Result<(bool, String), htldp::Error> {
    let mut rng = substream(seed, 6);
    let random = |rng: &mut htldp::rng::Stream| -> SparseHermitian {
        let n = rng.random_range(1..=4usize);
        let mut m = SparseHermitian::new(n).expect("n >= 1");
        for i in 0..n {
            for j in i..n {
                if rng.random::<f64>() < 0.6 {
                    let v = (rng.random_range(-2.0f64..2.0) * 2.0).round() / 2.0;
                    m.set(i, j, Complex64::new(v, 0.0)).expect("in range");
                }
            }
        }
        m
    };
    let mut ok = true;
    for _ in 0..100 {
        let (a, b, c) = (random(&mut rng), random(&mut rng), random(&mut rng));
        let ab = perm_invariant_distance(&a, &b)?;
        let bc = perm_invariant_distance(&b, &c)?;
        let ac = perm_invariant_distance(&a, &c)?;
        ok &= ac <= ab + bc + 1e-12 && (ab - perm_invariant_distance(&b, &a)?).abs() < 1e-15;
    }
    Ok((ok, "100 triples".into()))
}
