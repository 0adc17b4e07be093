mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use htldp::linalg::Hermitian;
use htldp::semicircle::stieltjes;
use htldp::spike::{bbp_outlier, isotropy_gap, largest_zero, limit_f, mu_eps, EigenEquation, SpikeSpec};
use htldp::Error;

fn to_c(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

struct Instance {
    h: Vec<Vec<f64>>,
    thetas: Vec<f64>,
    vs: Vec<Vec<f64>>,
}

fn instance(n: usize, k: usize, rng: &mut impl Rng) -> Instance {
    let h = common::random_symmetric(n, 1.0 / (n as f64).sqrt(), rng);
    let mut thetas: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..4.0)).filter(|t: &f64| t.abs() > 1e-3).collect();
    if thetas.is_empty() {
        thetas.push(1.5);
    }
    thetas.sort_by(f64::total_cmp);
    let vs = common::random_orthonormal(n, thetas.len(), rng);
    Instance { h, thetas, vs }
}

impl Instance {
    fn equation(&self) -> EigenEquation {
        let n = self.h.len();
        let h = Hermitian::from_real_fn(n, |i, j| self.h[i][j]).unwrap();
        let spike = SpikeSpec::new(self.thetas.clone(), self.vs.iter().map(|v| to_c(v)).collect()).unwrap();
        EigenEquation::new(h, spike).unwrap()
    }

    fn deformed(&self) -> Vec<Vec<f64>> {
        let mut m = self.h.clone();
        for (t, v) in self.thetas.iter().zip(&self.vs) {
            for i in 0..m.len() {
                for j in 0..m.len() {
                    m[i][j] += t * v[i] * v[j];
                }
            }
        }
        m
    }
}

#[test]
fn matrix_matches_explicit_resolvent() {
    let mut rng = common::rng(31);
    for _ in 0..20 {
        let n = rng.random_range(2..=30usize);
        let inst = instance(n, rng.random_range(1..=3), &mut rng);
        let eq = inst.equation();
        let x = eq.lambda_max() + rng.random_range(0.01..3.0);
        // (x - H)^{-1} by Gauss-Jordan
        let shifted: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|j| Complex64::new(if i == j { x } else { 0.0 } - inst.h[i][j], 0.0)).collect())
            .collect();
        let r = common::dense_inverse(&shifted);
        let m = eq.matrix(x).unwrap();
        let k = inst.thetas.len();
        for i in 0..k {
            for j in 0..k {
                let mut q = Complex64::default();
                for a in 0..n {
                    for b in 0..n {
                        q += inst.vs[i][a] * r[a][b] * inst.vs[j][b];
                    }
                }
                let expected = Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0) - inst.thetas[i] * q;
                assert!((m[i][j] - expected).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn determinant_is_the_characteristic_polynomial_ratio() {
    let mut rng = common::rng(32);
    for _ in 0..20 {
        let n = rng.random_range(2..=25usize);
        let inst = instance(n, rng.random_range(1..=3), &mut rng);
        let eq = inst.equation();
        let ev_h = common::jacobi_eigenvalues(&inst.h);
        let ev_p = common::jacobi_eigenvalues(&inst.deformed());
        for dx in [0.05, 0.5, 4.0] {
            let x = eq.lambda_max() + dx;
            let ratio: f64 = ev_p.iter().zip(&ev_h).map(|(p, h)| (x - p) / (x - h)).product();
            let f = eq.f_n(x).unwrap();
            assert!((f - ratio).abs() < 1e-9 * ratio.abs().max(1.0), "{f} vs {ratio}");
        }
    }
}

#[test]
fn largest_zero_matches_eigensolver_when_detached() {
    let mut rng = common::rng(33);
    let mut seen = 0;
    for _ in 0..60 {
        let n = rng.random_range(3..=60usize);
        let inst = instance(n, rng.random_range(1..=3), &mut rng);
        let top_h = *common::jacobi_eigenvalues(&inst.h).last().unwrap();
        let top = *common::jacobi_eigenvalues(&inst.deformed()).last().unwrap();
        let zero = inst.equation().largest_zero().unwrap();
        if top > top_h + 1e-6 {
            seen += 1;
            assert!((zero.unwrap() - top).abs() < 1e-8);
        }
    }
    assert!(seen > 20);
}

#[test]
fn complex_instances_match_real_embedding() {
    // A + iB is Hermitian iff [[A, -B], [B, A]] is symmetric, with each eigenvalue doubled
    let mut rng = common::rng(34);
    for _ in 0..10 {
        let n = rng.random_range(2..=15usize);
        let a = common::random_symmetric(n, 1.0 / (n as f64).sqrt(), &mut rng);
        let mut b = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.random_range(-1.0..1.0) / (n as f64).sqrt();
                b[i][j] = v;
                b[j][i] = -v;
            }
        }
        let re = common::random_orthonormal(n, 1, &mut rng).remove(0);
        let u: Vec<Complex64> = re.iter().map(|&x| Complex64::from_polar(x, 0.0) * Complex64::from_polar(1.0, 0.3)).collect();
        let theta = rng.random_range(1.5..4.0);
        let mut emb = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                let z = Complex64::new(a[i][j], b[i][j]) + theta * u[i] * u[j].conj();
                emb[i][j] = z.re;
                emb[i + n][j + n] = z.re;
                emb[i][j + n] = -z.im;
                emb[i + n][j] = z.im;
            }
        }
        let top = *common::jacobi_eigenvalues(&emb).last().unwrap();
        let mut h = Hermitian::zeros(n, true);
        for i in 0..n {
            for j in i..n {
                h.set_pair(i, j, Complex64::new(a[i][j], b[i][j]));
            }
        }
        let eq = EigenEquation::new(h, SpikeSpec::new(vec![theta], vec![u]).unwrap()).unwrap();
        if top > eq.lambda_max() + 1e-6 {
            assert!((eq.largest_zero().unwrap().unwrap() - top).abs() < 1e-8);
        }
    }
}

#[test]
fn f_n_tends_to_one() {
    let mut rng = common::rng(35);
    let inst = instance(20, 3, &mut rng);
    let eq = inst.equation();
    let x = 1e6 * (1.0 + eq.lambda_max().abs());
    assert!((eq.f_n(x).unwrap() - 1.0).abs() < 1e-5);
}

#[test]
fn evaluation_inside_spectrum_is_rejected() {
    let mut rng = common::rng(36);
    let eq = instance(10, 1, &mut rng).equation();
    let l = eq.lambda_max();
    assert!(matches!(eq.f_n(l), Err(Error::InsideSpectrum { .. })));
    assert!(matches!(eq.f_n(l - 1.0), Err(Error::InsideSpectrum { .. })));
    assert!(eq.f_n(l + 1e-3).is_ok());
}

#[test]
fn spike_dimension_must_match() {
    let h = Hermitian::from_diagonal(&[0.0, 1.0, 2.0]);
    let spike = SpikeSpec::basis(2.0, 0, 2).unwrap();
    assert!(EigenEquation::new(h, spike).is_err());
}

#[test]
fn diagonal_rank_one_anchor() {
    // H = diag(0, 1), spike 3 e_1: eigenvalues are 3 and 1, so the largest zero is 3
    let h = Hermitian::from_diagonal(&[0.0, 1.0]);
    let eq = EigenEquation::new(h, SpikeSpec::basis(3.0, 0, 2).unwrap()).unwrap();
    assert!((eq.largest_zero().unwrap().unwrap() - 3.0).abs() < 1e-11);
    // f_N(x) = 1 - 3/x
    assert!((eq.f_n(6.0).unwrap() - 0.5).abs() < 1e-14);
}

#[test]
fn scalar_zero_finder() {
    assert!((largest_zero(|x| 1.0 - 3.0 / x, 0.1, 10.0).unwrap().unwrap() - 3.0).abs() < 1e-11);
    assert_eq!(largest_zero(|_| 1.0, 0.0, 1.0).unwrap(), None);
    assert!(largest_zero(|x| x, 1.0, 1.0).is_err());
    let z = largest_zero(|x| (x - 1.0) * (x - 2.0) * (x - 3.0), 0.0, 4.0).unwrap().unwrap();
    assert!((z - 3.0).abs() < 1e-11);
    let z = largest_zero(|x| limit_f(&[1.5], x).unwrap(), 2.001, 20.0).unwrap().unwrap();
    assert!((z - (2.0 / 3.0 + 1.5)).abs() < 1e-10);
}

#[test]
fn limit_values() {
    assert!(limit_f(&[2.0], 2.5).unwrap().abs() < 1e-15);
    let x = 0.3 + 1.0 / 0.3;
    assert!((limit_f(&[-1.0, 3.0], x).unwrap() - 0.13).abs() < 1e-12);
    assert!(limit_f(&[3.0], 1.0).is_err());
}

#[test]
fn outlier_prediction() {
    assert_eq!(bbp_outlier(2.0), 2.5);
    assert_eq!(bbp_outlier(0.7), 2.0);
    assert_eq!(bbp_outlier(-4.0), 2.0);
    assert_eq!(mu_eps(&Hermitian::from_diagonal(&[0.5, 2.0])).unwrap(), 2.5);
}

#[test]
fn isotropy_gap_anchor() {
    let h = Hermitian::zeros(3, false);
    let mut u = vec![Complex64::default(); 3];
    u[0] = Complex64::new(1.0, 0.0);
    let x = 3.0;
    let gap = isotropy_gap(&h, &u, &u, x).unwrap();
    assert!((gap - (1.0 / x - stieltjes(x).unwrap()).abs()).abs() < 1e-15);
    assert!(isotropy_gap(&h, &u, &u, 1.5).is_err());
    let half: Vec<Complex64> = u.iter().map(|z| z * 0.5).collect();
    assert!(isotropy_gap(&h, &half, &u, x).is_err());
}

proptest! {
    #[test]
    fn rank_one_limit_coherence(theta in 1.0001f64..=50.0) {
        let z = largest_zero(|x| limit_f(&[theta], x).unwrap(), 2.0, 100.0).unwrap().unwrap();
        prop_assert!((z - bbp_outlier(theta)).abs() < 1e-10);
    }

    #[test]
    fn subcritical_spike_has_no_limit_zero(theta in -10.0f64..=1.0) {
        prop_assume!(theta != 0.0);
        prop_assert_eq!(largest_zero(|x| limit_f(&[theta], x).unwrap(), 2.0f64.next_up(), 100.0).unwrap(), None);
        // certified on a uniform grid too
        for k in 1..=2000 {
            let x = 2.0 + 98.0 * k as f64 / 2000.0;
            prop_assert!(limit_f(&[theta], x).unwrap() > 0.0);
        }
    }

    #[test]
    fn spike_spec_rejects_non_orthonormal(scale in 0.5f64..1.5, n in 2usize..10) {
        let mut v = vec![Complex64::default(); n];
        v[0] = Complex64::new(scale, 0.0);
        prop_assert_eq!(SpikeSpec::new(vec![1.0], vec![v]).is_ok(), (scale - 1.0).abs() < 1e-10);
    }
}
