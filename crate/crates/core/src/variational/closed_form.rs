//! Explicit values of the variational constant for the angle-support
//! configurations where it is known in closed form, together with a
//! minimizing matrix for each.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sparse::SparseHermitian;
use crate::error::{Error, Result};
use crate::heavy_tail::TailParams;

/// `b * sum_i |A_ii|^alpha + a * sum_{i<j} |A_ij|^alpha`.
pub fn weight_i(m: &SparseHermitian, params: &TailParams) -> f64 {
    let alpha = params.alpha;
    m.entries()
        .map(|(i, j, v)| {
            let w = if i == j { params.b } else { params.a };
            w * v.norm().powf(alpha)
        })
        .sum()
}

/// Every nonzero entry has its phase in the declared support (diagonal
/// entries against `nu1`, upper off-diagonal entries against `nu2`).
pub fn in_domain(m: &SparseHermitian, params: &TailParams) -> bool {
    m.entries().all(|(i, j, v)| {
        let phase = v / v.norm();
        if i == j {
            params.nu1_contains(phase)
        } else {
            params.nu2_contains(phase)
        }
    })
}

fn require_mid_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("helper defined for alpha in (1,2), got {alpha}")))
    }
}

/// Ratio `s/t = (a / (2b))^(1/(alpha-1))` of the diagonal and off-diagonal
/// weights in the extremal family.
fn weight_ratio(params: &TailParams) -> f64 {
    ((params.a / (2.0 * params.b)).ln() / (params.alpha - 1.0)).exp()
}

/// `psi(t) = t / ((1/b)^(1/(alpha-1)) + (t-1)(2/a)^(1/(alpha-1)))^(alpha-1)`.
///
/// Computed as `(a/2) t / (r + t - 1)^(alpha-1)` with `r` the weight ratio,
/// which stays finite as `alpha -> 1`.
pub fn psi(t: f64, params: &TailParams) -> Result<f64> {
    require_mid_alpha(params.alpha)?;
    if !(t >= 1.0) {
        return Err(Error::Domain(format!("psi is defined for t >= 1, got {t}")));
    }
    let r = weight_ratio(params);
    Ok(0.5 * params.a * t / (r + t - 1.0).powf(params.alpha - 1.0))
}

/// Real minimizer of `psi`: `(1 - (a/(2b))^(1/(alpha-1))) / (2 - alpha)`.
pub fn t0(params: &TailParams) -> Result<f64> {
    require_mid_alpha(params.alpha)?;
    Ok((1.0 - weight_ratio(params)) / (2.0 - params.alpha))
}

/// `phi(t) = t / (t-1)^(alpha-1)` for `t >= 2`.
pub fn phi(t: f64, alpha: f64) -> Result<f64> {
    require_mid_alpha(alpha)?;
    if !(t >= 2.0) {
        return Err(Error::Domain(format!("phi is defined for t >= 2, got {t}")));
    }
    Ok(t / (t - 1.0).powf(alpha - 1.0))
}

/// Real minimizer of `phi`: `1 / (2 - alpha)`.
pub fn t1(alpha: f64) -> Result<f64> {
    require_mid_alpha(alpha)?;
    Ok(1.0 / (2.0 - alpha))
}

/// `B^(n)(s,t)`: diagonal `s/(s+(n-1)t)`, off-diagonal `t/(s+(n-1)t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalMatrixFamily {
    n: usize,
    s: f64,
    t: f64,
}

impl ExtremalMatrixFamily {
    pub fn new(n: usize, s: f64, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("size must be at least 1".into()));
        }
        if !(s >= 0.0 && t >= 0.0 && s.is_finite() && t.is_finite()) || (s == 0.0 && t == 0.0) {
            return Err(Error::InvalidParams(format!("need s, t >= 0 not both zero, got ({s}, {t})")));
        }
        if n == 1 && s == 0.0 {
            return Err(Error::InvalidParams("B^(1)(0,t) is the zero matrix".into()));
        }
        Ok(Self { n, s, t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn denom(&self) -> f64 {
        self.s + (self.n as f64 - 1.0) * self.t
    }

    pub fn diagonal_value(&self) -> f64 {
        self.s / self.denom()
    }

    pub fn offdiagonal_value(&self) -> f64 {
        if self.n == 1 {
            0.0
        } else {
            self.t / self.denom()
        }
    }

    /// Eigenvalues of `(s-t)I + tJ` scaled by the denominator: `1` once and
    /// `(s-t)/(s+(n-1)t)` with multiplicity `n-1`, in nondecreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.denom();
        let mut ev = vec![(self.s - self.t) / d; self.n - 1];
        ev.push(1.0);
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Largest eigenvalue is exactly 1 when `s + (n-1)t >= |s - t|`.
    pub fn has_unit_top_eigenvalue(&self) -> bool {
        self.denom() >= (self.s - self.t).abs()
    }

    /// The matrix with every off-diagonal entry multiplied by `phase`.
    /// For `n <= 2` the spectrum does not depend on the phase.
    pub fn to_sparse_with_phase(&self, phase: Complex64) -> SparseHermitian {
        let mut m = SparseHermitian::new(self.n).expect("n >= 1");
        let dv = self.diagonal_value();
        let ov = self.offdiagonal_value();
        for i in 0..self.n {
            m.set(i, i, Complex64::new(dv, 0.0)).expect("in range");
            for j in (i + 1)..self.n {
                m.set(i, j, phase * ov).expect("in range");
            }
        }
        m
    }

    pub fn to_sparse(&self) -> SparseHermitian {
        self.to_sparse_with_phase(Complex64::new(1.0, 0.0))
    }
}

/// Which closed-form case applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Case {
    pub fn label(&self) -> &'static str {
        match self {
            Case::A => "a",
            Case::B => "b",
            Case::C => "c",
            Case::D => "d",
            Case::E => "e",
            Case::F => "f",
        }
    }

    pub const ALL: [Case; 6] = [Case::A, Case::B, Case::C, Case::D, Case::E, Case::F];
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub c: f64,
    pub witness: SparseHermitian,
    pub case: Case,
}

/// Identifies the closed-form case, or reports the configuration as unsupported.
pub fn classify(params: &TailParams) -> Result<Case> {
    params.validate()?;
    let one = Complex64::new(1.0, 0.0);
    let one_in_nu1 = params.nu1_contains(one);
    let one_in_nu2 = params.nu2_contains(one);
    if params.alpha <= 1.0 {
        return Ok(Case::A);
    }
    let b_small = params.b <= params.a / 2.0;
    if one_in_nu1 && b_small {
        Ok(Case::B)
    } else if one_in_nu1 && one_in_nu2 {
        Ok(Case::C)
    } else if one_in_nu1 && params.nu2_is_minus_one() {
        Ok(Case::D)
    } else if params.nu1_is_minus_one() && one_in_nu2 {
        Ok(Case::E)
    } else if params.nu1_is_minus_one() && params.nu2_is_minus_one() {
        Ok(Case::F)
    } else {
        Err(Error::UnsupportedSupports(format!(
            "alpha = {}, supp(nu1) = {:?}, supp(nu2) = {:?}",
            params.alpha, params.nu1_support, params.nu2_support
        )))
    }
}

/// Preferred off-diagonal phase for 2x2 witnesses: `+1` when admissible.
fn offdiag_phase(params: &TailParams) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if params.nu2_contains(one) {
        one
    } else {
        params.nu2_support[0]
    }
}

fn unit_diagonal() -> SparseHermitian {
    SparseHermitian::diagonal(&[1.0]).expect("1x1")
}

/// Integer candidates `floor(t), ceil(t)` clamped below by `min`, deduplicated.
fn integer_candidates(t: f64, min: usize) -> Vec<usize> {
    let lo = (t.floor().max(min as f64)) as usize;
    let hi = (t.ceil().max(min as f64)) as usize;
    if lo == hi {
        vec![lo]
    } else {
        vec![lo, hi]
    }
}

/// The constant `c` with an explicit minimizer. Ties go to the smaller matrix.
pub fn closed_form_c(params: &TailParams) -> Result<ClosedForm> {
    let case = classify(params)?;
    let (a, b, alpha) = (params.a, params.b, params.alpha);
    let one = Complex64::new(1.0, 0.0);
    let pair = |phase: Complex64| {
        ExtremalMatrixFamily::new(2, 0.0, 1.0).expect("valid").to_sparse_with_phase(phase)
    };
    let (c, witness) = match case {
        Case::A => {
            if params.nu1_contains(one) && b <= a {
                (b, unit_diagonal())
            } else {
                (a, pair(offdiag_phase(params)))
            }
        }
        Case::B => (b, unit_diagonal()),
        Case::C => {
            let r = weight_ratio(params);
            let mut best: Option<(f64, usize)> = None;
            for k in integer_candidates(t0(params)?, 1) {
                let v = psi(k as f64, params)?;
                if best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, k));
                }
            }
            let (v, k) = best.expect("at least one candidate");
            // B^(k)(s, t) depends on (s, t) only through r = s/t
            let family = ExtremalMatrixFamily::new(k, r, 1.0)?;
            (v, family.to_sparse())
        }
        Case::D => {
            let r = weight_ratio(params);
            let pair_value = a / (r + 1.0).powf(alpha - 1.0);
            if b <= pair_value {
                (b, unit_diagonal())
            } else {
                let family = ExtremalMatrixFamily::new(2, r, 1.0)?;
                (pair_value, family.to_sparse_with_phase(-one))
            }
        }
        Case::E => {
            let mut best: Option<(f64, usize)> = None;
            for n in integer_candidates(t1(alpha)?, 2) {
                let v = 0.5 * a * phi(n as f64, alpha)?;
                if best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, n));
                }
            }
            let (v, n) = best.expect("at least one candidate");
            (v, ExtremalMatrixFamily::new(n, 0.0, 1.0)?.to_sparse())
        }
        Case::F => (a, pair(-one)),
    };
    Ok(ClosedForm { c, witness, case })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(alpha: f64, a: f64, b: f64, nu1: &[f64], nu2: &[f64]) -> TailParams {
        TailParams::real(alpha, a, b, nu1, nu2).unwrap()
    }

    #[test]
    fn weight_anchors() {
        let p = real(0.7, 2.0, 3.0, &[1.0], &[1.0]);
        assert_eq!(weight_i(&unit_diagonal(), &p), 3.0);
        let m = ExtremalMatrixFamily::new(2, 0.0, 1.0).unwrap().to_sparse_with_phase(Complex64::from_polar(1.0, 0.4));
        assert!((weight_i(&m, &p) - 2.0).abs() < 1e-14);
        // B^(n)(0,1): n(n-1)/2 entries of modulus 1/(n-1)
        for n in 2..7 {
            let m = ExtremalMatrixFamily::new(n, 0.0, 1.0).unwrap().to_sparse();
            let nf = n as f64;
            let direct: f64 = (0..n * (n - 1) / 2).map(|_| 2.0 * (1.0 / (nf - 1.0)).powf(0.7)).sum();
            let formula = (2.0 / 2.0) * nf / (nf - 1.0).powf(0.7 - 1.0);
            assert!((weight_i(&m, &p) - direct).abs() < 1e-12);
            assert!((direct - formula).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_membership() {
        let d = unit_diagonal();
        assert!(in_domain(&d, &real(1.5, 1.0, 1.0, &[1.0], &[1.0])));
        assert!(!in_domain(&d, &real(1.5, 1.0, 1.0, &[-1.0], &[1.0])));
        let m = ExtremalMatrixFamily::new(2, 0.0, 1.0).unwrap().to_sparse_with_phase(Complex64::new(-1.0, 0.0));
        assert!(in_domain(&m, &real(1.5, 1.0, 1.0, &[-1.0], &[-1.0])));
        assert!(!in_domain(&m, &real(1.5, 1.0, 1.0, &[-1.0], &[1.0])));
    }

    #[test]
    fn helper_anchors() {
        let p = real(1.5, 1.0, 1.0, &[1.0], &[1.0]);
        assert!((psi(1.0, &p).unwrap() - 1.0).abs() < 1e-14);
        let p2 = real(1.3, 0.7, 2.2, &[1.0], &[1.0]);
        assert!((psi(1.0, &p2).unwrap() - 2.2).abs() < 1e-12);
        assert!((t0(&p).unwrap() - 1.5).abs() < 1e-14);
        assert!((psi(2.0, &p).unwrap() - 2.0 / 5f64.sqrt()).abs() < 1e-14);
        assert!(psi(0.5, &p).is_err());
        assert!(t0(&real(0.9, 1.0, 1.0, &[1.0], &[1.0])).is_err());
        assert_eq!(phi(2.0, 1.3).unwrap(), 2.0);
        assert_eq!(t1(1.5).unwrap(), 2.0);
        assert!((t1(1.75).unwrap() - 4.0).abs() < 1e-14);
        assert!((phi(4.0, 1.75).unwrap() - 4.0 / 3f64.powf(0.75)).abs() < 1e-14);
        assert!(phi(1.5, 1.5).is_err());
        assert!(phi(3.0, 2.0).is_err());
    }

    #[test]
    fn psi_matches_direct_formula() {
        let p = real(1.4, 0.8, 1.7, &[1.0], &[1.0]);
        let e = 1.0 / (p.alpha - 1.0);
        let s = (1.0 / p.b).powf(e);
        let t = (2.0 / p.a).powf(e);
        for k in 1..8 {
            let kf = k as f64;
            let direct = kf / (s + (kf - 1.0) * t).powf(p.alpha - 1.0);
            assert!((psi(kf, &p).unwrap() - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn psi_is_unimodal_around_t0() {
        let p = real(1.7, 1.0, 3.0, &[1.0], &[1.0]);
        let t0 = t0(&p).unwrap();
        let mut prev = psi(1.0, &p).unwrap();
        let mut t = 1.0;
        while t < t0 {
            t += 0.01;
            let v = psi(t.min(t0), &p).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        while t < t0 + 5.0 {
            t += 0.01;
            let v = psi(t, &p).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn extremal_family() {
        let f = ExtremalMatrixFamily::new(4, 1.0, 2.0).unwrap();
        assert!(f.has_unit_top_eigenvalue());
        let dense = f.to_sparse().to_dense().eigenvalues().unwrap();
        for (x, y) in dense.iter().zip(f.eigenvalues()) {
            assert!((x - y).abs() < 1e-13);
        }
        assert!(ExtremalMatrixFamily::new(3, 0.0, 0.0).is_err());
        assert!(ExtremalMatrixFamily::new(1, 0.0, 1.0).is_err());
        // s - t > s + (n-1) t fails only for t < 0, so every valid 1x1 works
        assert!(ExtremalMatrixFamily::new(1, 2.0, 0.0).unwrap().has_unit_top_eigenvalue());
    }

    #[test]
    fn closed_form_anchors() {
        let cf = closed_form_c(&real(1.0, 1.0, 1.0, &[1.0], &[1.0, -1.0])).unwrap();
        assert_eq!(cf.c, 1.0);
        assert_eq!(cf.case, Case::A);
        let cf = closed_form_c(&real(0.5, 2.0, 3.0, &[-1.0], &[1.0, -1.0])).unwrap();
        assert_eq!(cf.c, 2.0);
        let cf = closed_form_c(&real(1.5, 1.0, 1.0, &[1.0], &[1.0])).unwrap();
        assert_eq!(cf.case, Case::C);
        assert!((cf.c - 2.0 / 5f64.sqrt()).abs() < 1e-14);
        let expected = ExtremalMatrixFamily::new(2, 1.0, 4.0).unwrap().to_sparse();
        for (x, y) in cf.witness.to_rows().iter().flatten().zip(expected.to_rows().iter().flatten()) {
            assert!((x - y).norm() < 1e-14);
        }
        let cf = closed_form_c(&real(1.5, 1.0, 0.4, &[1.0], &[1.0])).unwrap();
        assert_eq!((cf.c, cf.case), (0.4, Case::B));
        let cf = closed_form_c(&real(1.5, 1.3, 0.9, &[-1.0], &[-1.0])).unwrap();
        assert_eq!((cf.c, cf.case), (1.3, Case::F));
    }

    #[test]
    fn case_e_carries_half_a() {
        let cf = closed_form_c(&real(1.75, 2.0, 1.0, &[-1.0], &[1.0])).unwrap();
        assert_eq!(cf.case, Case::E);
        assert!((cf.c - phi(4.0, 1.75).unwrap()).abs() < 1e-14);
        assert_eq!(cf.witness.n(), 4);
    }

    #[test]
    fn index_clamping() {
        // t0 < 1: only psi(1) = b is considered
        let p = real(1.2, 1.0, 0.55, &[1.0], &[1.0]);
        assert!(t0(&p).unwrap() < 1.0);
        let cf = closed_form_c(&p).unwrap();
        assert_eq!(cf.case, Case::C);
        assert!((cf.c - 0.55).abs() < 1e-14);
        assert_eq!(cf.witness.n(), 1);
        // t1 in (1,2): candidates clamp to n = 2
        let cf = closed_form_c(&real(1.2, 1.0, 1.0, &[-1.0], &[1.0])).unwrap();
        assert_eq!(cf.witness.n(), 2);
        assert!((cf.c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn witnesses_are_admissible() {
        let configs = [
            real(0.6, 1.0, 2.0, &[1.0], &[-1.0]),
            real(0.6, 1.0, 2.0, &[-1.0], &[-1.0]),
            real(1.3, 1.0, 0.3, &[1.0, -1.0], &[-1.0]),
            real(1.3, 1.0, 2.0, &[1.0], &[1.0, -1.0]),
            real(1.6, 1.0, 2.0, &[1.0], &[-1.0]),
            real(1.6, 1.0, 0.52, &[1.0], &[-1.0]),
            real(1.6, 1.0, 2.0, &[-1.0], &[1.0]),
            real(1.6, 1.0, 2.0, &[-1.0], &[-1.0]),
        ];
        for p in &configs {
            let cf = closed_form_c(p).unwrap();
            let lambda = cf.witness.largest_eigenvalue().unwrap();
            assert!((lambda - 1.0).abs() < 1e-10, "{:?}: lambda {lambda}", cf.case);
            assert!(in_domain(&cf.witness, p), "{:?}", cf.case);
            assert!((weight_i(&cf.witness, p) - cf.c).abs() < 1e-10 * cf.c.max(1.0), "{:?}", cf.case);
        }
    }

    #[test]
    fn unsupported_configuration_is_reported() {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let p = TailParams::new(1.5, 1.0, 1.0, 0.5, vec![-one], vec![i, -i], true).unwrap();
        assert!(matches!(closed_form_c(&p), Err(Error::UnsupportedSupports(_))));
        let p = TailParams::new(1.5, 1.0, 1.0, 0.5, vec![one], vec![i], true).unwrap();
        assert!(matches!(closed_form_c(&p), Err(Error::UnsupportedSupports(_))));
        // alpha <= 1 is always covered
        let p = TailParams::new(0.8, 1.0, 1.0, 0.5, vec![-one], vec![i], true).unwrap();
        assert_eq!(closed_form_c(&p).unwrap().c, 1.0);
    }
}
