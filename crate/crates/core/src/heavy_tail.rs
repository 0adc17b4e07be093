//! Wigner matrices with stretched-exponential entries.
//!
//! [`TailParams`] describes the statistical model: tail exponent `alpha`,
//! tail constants `a` (off-diagonal) and `b` (diagonal), a uniform tail bound
//! constant `kappa`, and the finite angle supports of large diagonal and
//! off-diagonal entries. [`EntrySampler`] draws entries from a concrete law in
//! that class, [`sample_wigner`] assembles the matrix and [`decompose`] splits
//! it by entry size into the four parts `A + B + C + D`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Weibull};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::linalg::Hermitian;
use crate::rng::Stream;

/// Tolerance used when comparing phases against a declared support.
pub const PHASE_TOL: f64 = 1e-9;

const MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    pub alpha: f64,
    /// Off-diagonal tail constant.
    pub a: f64,
    /// Diagonal tail constant.
    pub b: f64,
    /// Uniform bound `P(|X| > t) <= exp(-kappa t^alpha)`.
    pub kappa: f64,
    /// Angle support of large diagonal entries (a subset of `{-1, +1}`).
    pub nu1_support: Vec<Complex64>,
    /// Angle support of large off-diagonal entries.
    pub nu2_support: Vec<Complex64>,
    pub complex_entries: bool,
}

impl TailParams {
    pub fn new(
        alpha: f64,
        a: f64,
        b: f64,
        kappa: f64,
        nu1_support: Vec<Complex64>,
        nu2_support: Vec<Complex64>,
        complex_entries: bool,
    ) -> Result<Self> {
        let p = Self { alpha, a, b, kappa, nu1_support, nu2_support, complex_entries };
        p.validate()?;
        Ok(p)
    }

    /// Real entries with sign supports given as lists of `+1.0` / `-1.0`.
    /// `kappa` defaults to `min(a, b) / 2`.
    pub fn real(alpha: f64, a: f64, b: f64, nu1: &[f64], nu2: &[f64]) -> Result<Self> {
        let to_c = |s: &[f64]| s.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        Self::new(alpha, a, b, 0.5 * a.min(b), to_c(nu1), to_c(nu2), false)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return bad(format!("alpha must lie in (0,2), got {}", self.alpha));
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("kappa", self.kappa)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.nu1_support.is_empty() || self.nu2_support.is_empty() {
            return bad("angle supports must be nonempty".into());
        }
        for z in self.nu1_support.iter().chain(&self.nu2_support) {
            if !((z.norm() - 1.0).abs() <= MODULUS_TOL) {
                return bad(format!("support point {z} is not of modulus 1"));
            }
        }
        // diagonal entries of a Hermitian matrix are real
        if self.nu1_support.iter().any(|z| z.im.abs() > PHASE_TOL) {
            return bad("diagonal support must be a subset of {-1, +1}".into());
        }
        if !self.complex_entries && self.nu2_support.iter().any(|z| z.im.abs() > PHASE_TOL) {
            return bad("real entries require an off-diagonal support inside {-1, +1}".into());
        }
        Ok(())
    }

    pub fn nu1_contains(&self, phase: Complex64) -> bool {
        support_contains(&self.nu1_support, phase)
    }

    pub fn nu2_contains(&self, phase: Complex64) -> bool {
        support_contains(&self.nu2_support, phase)
    }

    /// `supp(nu) == {-1}` up to duplicates.
    pub fn nu1_is_minus_one(&self) -> bool {
        is_minus_one(&self.nu1_support)
    }

    pub fn nu2_is_minus_one(&self) -> bool {
        is_minus_one(&self.nu2_support)
    }
}

pub fn support_contains(support: &[Complex64], phase: Complex64) -> bool {
    support.iter().any(|z| (z - phase).norm() <= PHASE_TOL)
}

fn is_minus_one(support: &[Complex64]) -> bool {
    let m1 = Complex64::new(-1.0, 0.0);
    support.iter().all(|z| (z - m1).norm() <= PHASE_TOL)
}

fn axis_phases() -> Vec<Complex64> {
    vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ]
}

fn same_support(a: &[Complex64], b: &[Complex64]) -> bool {
    a.iter().all(|z| support_contains(b, *z)) && b.iter().all(|z| support_contains(a, *z))
}

/// Which concrete entry law to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EntryLaw {
    /// Angle times Weibull modulus, centred and scaled to unit variance.
    /// The off-diagonal tail constant is then fixed by `alpha`; see
    /// [`EntrySampler::effective_a`].
    #[default]
    Weibull,
    /// Bounded bulk plus a Weibull tail component with the declared `a`.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Diagonal,
    OffDiagonal,
}

impl std::str::FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" | "diag" => Ok(Role::Diagonal),
            "offdiagonal" | "off-diagonal" | "off" => Ok(Role::OffDiagonal),
            other => Err(Error::InvalidParams(format!("invalid role {other:?}"))),
        }
    }
}

/// Phase-times-modulus law with an optional bounded bulk, centred by `shift`
/// and divided by `norm`.
#[derive(Debug, Clone)]
struct OffLaw {
    phases: Vec<Complex64>,
    tail_scale: f64,
    tail_weight: f64,
    bulk: f64,
    shift: Complex64,
    norm: f64,
    tail_constant: f64,
}

impl OffLaw {
    fn weibull(alpha: f64, phases: Vec<Complex64>) -> Self {
        let mean_phase = mean(&phases);
        let shift = mean_phase * gamma(1.0 + 1.0 / alpha);
        let norm = (gamma(1.0 + 2.0 / alpha) - shift.norm_sqr()).sqrt();
        Self {
            phases,
            tail_scale: 1.0,
            tail_weight: 1.0,
            bulk: 0.0,
            shift,
            norm,
            tail_constant: norm.powf(alpha),
        }
    }

    fn mixture(alpha: f64, a: f64, phases: Vec<Complex64>) -> Self {
        let tail_scale = a.powf(-1.0 / alpha);
        let m1 = tail_scale * gamma(1.0 + 1.0 / alpha);
        let m2 = tail_scale * tail_scale * gamma(1.0 + 2.0 / alpha);
        let p = (0.5 / m2).min(0.25);
        let shift = mean(&phases) * (p * m1);
        let bulk = ((1.0 + shift.norm_sqr() - p * m2) / (1.0 - p)).sqrt();
        Self { phases, tail_scale, tail_weight: p, bulk, shift, norm: 1.0, tail_constant: a }
    }
}

fn mean(phases: &[Complex64]) -> Complex64 {
    phases.iter().sum::<Complex64>() / phases.len() as f64
}

/// Draws diagonal and off-diagonal entries of a Wigner matrix.
#[derive(Debug, Clone)]
pub struct EntrySampler {
    params: TailParams,
    law: EntryLaw,
    /// Unit-scale Weibull: survival function `exp(-t^alpha)`.
    modulus: Weibull<f64>,
    diag_scale: f64,
    off: OffLaw,
}

impl EntrySampler {
    pub fn new(params: &TailParams, law: EntryLaw) -> Result<Self> {
        params.validate()?;
        let alpha = params.alpha;
        let off = if params.complex_entries {
            // real and imaginary parts are independent symmetric draws, so the
            // large-value angles sit on the axes
            if !same_support(&params.nu2_support, &axis_phases()) {
                return Err(Error::InvalidParams(
                    "complex entries with independent real and imaginary parts have \
                     off-diagonal angle support {1, i, -1, -i}"
                        .into(),
                ));
            }
            let signs = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
            match law {
                EntryLaw::Weibull => OffLaw::weibull(alpha, signs),
                EntryLaw::Mixture => OffLaw::mixture(alpha, params.a * 2f64.powf(-alpha / 2.0), signs),
            }
        } else {
            let phases = params.nu2_support.iter().map(|z| Complex64::new(z.re.signum(), 0.0)).collect();
            match law {
                EntryLaw::Weibull => OffLaw::weibull(alpha, phases),
                EntryLaw::Mixture => OffLaw::mixture(alpha, params.a, phases),
            }
        };
        Ok(Self {
            params: params.clone(),
            law,
            modulus: Weibull::new(1.0, alpha).map_err(|e| Error::InvalidParams(e.to_string()))?,
            diag_scale: params.b.powf(-1.0 / alpha),
            off,
        })
    }

    pub fn params(&self) -> &TailParams {
        &self.params
    }

    pub fn law(&self) -> EntryLaw {
        self.law
    }

    /// Tail constant `lim -t^(-alpha) log P(|X_12| > t)` of the law actually drawn.
    pub fn effective_a(&self) -> f64 {
        if self.params.complex_entries {
            self.off.tail_constant * 2f64.powf(self.params.alpha / 2.0)
        } else {
            self.off.tail_constant
        }
    }

    pub fn effective_b(&self) -> f64 {
        self.params.b
    }

    /// The declared parameters with `a` replaced by [`Self::effective_a`].
    pub fn effective_params(&self) -> TailParams {
        TailParams { a: self.effective_a(), ..self.params.clone() }
    }

    pub fn sample(&self, role: Role, rng: &mut Stream) -> Complex64 {
        match role {
            Role::Diagonal => {
                let support = &self.params.nu1_support;
                let phase = support[rng.random_range(0..support.len())];
                let w = self.diag_scale * self.modulus.sample(rng);
                Complex64::new(phase.re.signum() * w, 0.0)
            }
            Role::OffDiagonal => {
                if self.params.complex_entries {
                    let re = self.draw_off(rng).re;
                    let im = self.draw_off(rng).re;
                    Complex64::new(re, im) * FRAC_1_SQRT_2
                } else {
                    self.draw_off(rng)
                }
            }
        }
    }

    fn draw_off(&self, rng: &mut Stream) -> Complex64 {
        let off = &self.off;
        let z = if off.tail_weight >= 1.0 || rng.random::<f64>() < off.tail_weight {
            let phase = off.phases[rng.random_range(0..off.phases.len())];
            phase * (off.tail_scale * self.modulus.sample(rng))
        } else if rng.random::<bool>() {
            Complex64::new(off.bulk, 0.0)
        } else {
            Complex64::new(-off.bulk, 0.0)
        };
        (z - off.shift) / off.norm
    }
}

/// An unnormalized Wigner matrix `X`; the normalized matrix is `X / sqrt(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSample {
    raw: Hermitian,
}

impl WignerSample {
    pub fn from_raw(raw: Hermitian) -> Self {
        Self { raw }
    }

    pub fn n(&self) -> usize {
        self.raw.dim()
    }

    pub fn raw(&self) -> &Hermitian {
        &self.raw
    }

    pub fn raw_mut(&mut self) -> &mut Hermitian {
        &mut self.raw
    }

    pub fn normalized(&self) -> Hermitian {
        normalize(&self.raw)
    }
}

fn normalize(raw: &Hermitian) -> Hermitian {
    let s = (raw.dim() as f64).sqrt();
    match raw {
        Hermitian::Real(m) => Hermitian::Real(faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / s)),
        Hermitian::Complex(m) => Hermitian::Complex(faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / s)),
    }
}

/// Draws the upper triangle row by row (`i <= j`) from `rng`.
pub fn sample_wigner(n: usize, sampler: &EntrySampler, rng: &mut Stream) -> Result<WignerSample> {
    if n == 0 {
        return Err(Error::InvalidParams("matrix size must be at least 1".into()));
    }
    let complex = sampler.params.complex_entries;
    let mut raw = Hermitian::zeros(n, complex);
    match &mut raw {
        Hermitian::Real(m) => {
            for i in 0..n {
                m[(i, i)] = sampler.sample(Role::Diagonal, rng).re;
                for j in (i + 1)..n {
                    let v = sampler.sample(Role::OffDiagonal, rng).re;
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
        }
        Hermitian::Complex(m) => {
            for i in 0..n {
                m[(i, i)] = sampler.sample(Role::Diagonal, rng);
                for j in (i + 1)..n {
                    let v = sampler.sample(Role::OffDiagonal, rng);
                    m[(i, j)] = v;
                    m[(j, i)] = v.conj();
                }
            }
        }
    }
    Ok(WignerSample { raw })
}

/// Thresholds `(epsilon, d)` of the size decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionThresholds {
    epsilon: f64,
    d: f64,
}

impl DecompositionThresholds {
    /// Requires `0 < epsilon <= 1` and `d * alpha > 1`.
    pub fn new(epsilon: f64, d: f64, alpha: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParams(format!("epsilon must lie in (0,1], got {epsilon}")));
        }
        if !(d > 0.0 && d * alpha > 1.0 && d.is_finite()) {
            return Err(Error::InvalidParams(format!("need d > 0 with d*alpha > 1, got d={d}, alpha={alpha}")));
        }
        Ok(Self { epsilon, d })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `((log N)^d, epsilon sqrt(N), sqrt(N) / epsilon)`.
    pub fn cutoffs(&self, n: usize) -> (f64, f64, f64) {
        let nf = n as f64;
        (nf.ln().powf(self.d), self.epsilon * nf.sqrt(), nf.sqrt() / self.epsilon)
    }
}

/// `max(|Re z|, |Im z|)`.
pub fn sup_norm(z: Complex64) -> f64 {
    z.re.abs().max(z.im.abs())
}

/// Which of the four parts an entry falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    A,
    B,
    C,
    D,
}

impl DecompositionThresholds {
    /// Classifies a raw entry. `A` wins when the `(log N)^d` cutoff overlaps
    /// the `C` window, which only happens for small `N`.
    pub fn classify(&self, n: usize, z: Complex64) -> Part {
        let (small, lo, hi) = self.cutoffs(n);
        let v = sup_norm(z);
        if v <= small {
            Part::A
        } else if v < lo {
            Part::B
        } else if v <= hi {
            Part::C
        } else {
            Part::D
        }
    }
}

/// The four normalized parts; they sum to `X / sqrt(N)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub a: Hermitian,
    pub b: Hermitian,
    pub c: Hermitian,
    pub d: Hermitian,
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.a.dim()
    }

    pub fn sum(&self) -> Result<Hermitian> {
        self.a.add(&self.b)?.add(&self.c)?.add(&self.d)
    }

    pub fn part(&self, p: Part) -> &Hermitian {
        match p {
            Part::A => &self.a,
            Part::B => &self.b,
            Part::C => &self.c,
            Part::D => &self.d,
        }
    }
}

pub fn decompose(sample: &WignerSample, thresholds: &DecompositionThresholds) -> Result<Decomposition> {
    let n = sample.n();
    if n < 2 {
        return Err(Error::InvalidParams("decomposition needs N >= 2 so that log N > 0".into()));
    }
    let normalized = sample.normalized();
    let complex = sample.raw.is_complex();
    let mut parts = [
        Hermitian::zeros(n, complex),
        Hermitian::zeros(n, complex),
        Hermitian::zeros(n, complex),
        Hermitian::zeros(n, complex),
    ];
    for i in 0..n {
        for j in i..n {
            let raw = sample.raw.get(i, j);
            let idx = match thresholds.classify(n, raw) {
                Part::A => 0,
                Part::B => 1,
                Part::C => 2,
                Part::D => 3,
            };
            let target = &mut parts[idx];
            match (target, &normalized) {
                (Hermitian::Real(t), Hermitian::Real(x)) => {
                    t[(i, j)] = x[(i, j)];
                    t[(j, i)] = x[(j, i)];
                }
                (Hermitian::Complex(t), Hermitian::Complex(x)) => {
                    t[(i, j)] = x[(i, j)];
                    t[(j, i)] = x[(j, i)];
                }
                _ => unreachable!("parts share the representation of the input"),
            }
        }
    }
    let [a, b, c, d] = parts;
    Ok(Decomposition { a, b, c, d })
}

/// Number of nonzero entries of the `C` part, both triangles counted.
pub fn count_c_entries(dec: &Decomposition) -> usize {
    let n = dec.n();
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            if dec.c.get(i, j) != Complex64::new(0.0, 0.0) {
                count += 1;
            }
        }
    }
    count
}
