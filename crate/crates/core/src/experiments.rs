//! Seeded Monte Carlo campaigns.
//!
//! Every trial draws from its own ChaCha substream: trial `t` of a run at
//! size `N` uses stream index `N * 2^32 + t` of the master seed (see
//! [`trial_stream`]). Trials run on the rayon pool and are merged in trial
//! order, so results do not depend on the number of worker threads.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::heavy_tail::{sample_wigner, sup_norm, EntryLaw, EntrySampler, TailParams};
use crate::linalg::Hermitian;
use crate::rng::{substream, Stream};
use crate::semicircle::{rate_j, RateFunctionParams};

pub const SCHEMA_VERSION: u32 = 1;

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959963984540054;

/// Stream for trial `trial` of a run at size `n`.
pub fn trial_stream(seed: u64, n: usize, trial: usize) -> Stream {
    substream(seed, ((n as u64) << 32) | trial as u64)
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Wilson score interval at 95% for `hits` successes out of `trials`.
pub fn wilson_interval(hits: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub x: f64,
    pub hits: usize,
    pub trials: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TailEstimate {
    pub fn from_counts(x: f64, hits: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, trials);
        let p_hat = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        Self { x, hits, trials, p_hat, ci_low, ci_high }
    }
}

/// Largest eigenvalue of `trials` independent normalized Wigner samples.
pub fn lambda_samples(n: usize, trials: usize, sampler: &EntrySampler, seed: u64) -> Result<Vec<f64>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_stream(seed, n, t);
            sample_wigner(n, sampler, &mut rng)?.normalized().largest_eigenvalue()
        })
        .collect()
}

/// Fraction of samples strictly above each `x`, with Wilson intervals.
pub fn tail_from_samples(samples: &[f64], x_grid: &[f64]) -> Vec<TailEstimate> {
    x_grid
        .iter()
        .map(|&x| TailEstimate::from_counts(x, samples.iter().filter(|&&l| l > x).count(), samples.len()))
        .collect()
}

/// `P(lambda_max > x)` at size `n` estimated from `trials` samples.
pub fn estimate_tail(n: usize, x: f64, trials: usize, sampler: &EntrySampler, seed: u64) -> Result<TailEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let samples = lambda_samples(n, trials, sampler, seed)?;
    Ok(tail_from_samples(&samples, &[x])[0])
}

/// Configuration of one tail-estimation run. Its JSON form is hashed into
/// the record so that outputs can be matched to inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRunConfig {
    pub n: usize,
    pub x_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub params: TailParams,
    pub law: EntryLaw,
}

impl TailRunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        if self.x_grid.is_empty() || self.x_grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("x grid must be nonempty and finite".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema: u32,
    pub config_hash: String,
    pub seed: u64,
    pub n: usize,
    pub trials: usize,
    pub params: TailParams,
    pub law: EntryLaw,
    pub x_grid: Vec<f64>,
    pub tail_estimates: Vec<TailEstimate>,
    pub lambda_samples: Vec<f64>,
    /// Seconds spent; not persisted so that files are reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

impl ExperimentRecord {
    pub fn run(config: &TailRunConfig) -> Result<Self> {
        config.validate()?;
        let start = std::time::Instant::now();
        let sampler = EntrySampler::new(&config.params, config.law)?;
        let samples = lambda_samples(config.n, config.trials, &sampler, config.seed)?;
        Ok(Self {
            schema: SCHEMA_VERSION,
            config_hash: config.hash(),
            seed: config.seed,
            n: config.n,
            trials: config.trials,
            params: config.params.clone(),
            law: config.law,
            x_grid: config.x_grid.clone(),
            tail_estimates: tail_from_samples(&samples, &config.x_grid),
            lambda_samples: samples,
            wall_time: start.elapsed().as_secs_f64(),
        })
    }

    pub fn file_stem(&self) -> String {
        format!("tail-n{}-seed{}", self.n, self.seed)
    }

    /// Writes `<stem>.json`, `<stem>-tail.csv` and `<stem>-lambda.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let stem = self.file_stem();
        let json = dir.join(format!("{stem}.json"));
        fs::write(&json, serde_json::to_string_pretty(self)? + "\n")?;
        let tail = dir.join(format!("{stem}-tail.csv"));
        fs::write(&tail, tail_csv(&self.tail_estimates)?)?;
        let lambda = dir.join(format!("{stem}-lambda.csv"));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "lambda_max"]).map_err(csv_err)?;
        for (t, l) in self.lambda_samples.iter().enumerate() {
            w.write_record([t.to_string(), l.to_string()]).map_err(csv_err)?;
        }
        fs::write(&lambda, w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
        Ok(vec![json, tail, lambda])
    }

    pub fn load(path: &Path) -> Result<Self> {
        let rec: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        if rec.schema != SCHEMA_VERSION {
            return Err(Error::Format(format!("unsupported record schema {}", rec.schema)));
        }
        Ok(rec)
    }

    pub fn estimate_at(&self, x: f64) -> Option<&TailEstimate> {
        self.tail_estimates.iter().find(|e| e.x == x)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// CSV table `x,hits,trials,p_hat,ci_low,ci_high`.
pub fn tail_csv(rows: &[TailEstimate]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn parse_tail_csv(text: &str) -> Result<Vec<TailEstimate>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err)
}

/// Where the large entry is planted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Planting {
    /// `X_11 = theta sqrt(N)`.
    #[default]
    Diagonal,
    /// `X_12 = X_21 = theta sqrt(N)`.
    OffDiagonal,
}

/// Entries with `|z|_inf` above `(ln N)^(2/alpha)` are zeroed before planting.
pub fn truncation_level(n: usize, alpha: f64) -> f64 {
    (n as f64).ln().powf(2.0 / alpha)
}

/// Largest eigenvalue of `trials` samples in which every entry above
/// [`truncation_level`] is removed and one entry (or a symmetric pair) is
/// forced to `theta sqrt(N)` before normalization.
pub fn planted_spike_run(
    n: usize,
    theta: f64,
    planting: Planting,
    trials: usize,
    sampler: &EntrySampler,
    seed: u64,
) -> Result<Vec<f64>> {
    let min_n = match planting {
        Planting::Diagonal => 1,
        Planting::OffDiagonal => 2,
    };
    if n < min_n.max(2) {
        return Err(Error::InvalidParams(format!("planted runs need N >= 2, got {n}")));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidParams("theta must be finite".into()));
    }
    let cut = truncation_level(n, sampler.params().alpha);
    let big = theta * (n as f64).sqrt();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_stream(seed, n, t);
            let mut sample = sample_wigner(n, sampler, &mut rng)?;
            let raw = sample.raw_mut();
            for i in 0..n {
                for j in i..n {
                    if sup_norm(raw.get(i, j)) > cut {
                        raw.set_pair(i, j, Complex64::default());
                    }
                }
            }
            match planting {
                Planting::Diagonal => raw.set_pair(0, 0, Complex64::new(big, 0.0)),
                Planting::OffDiagonal => raw.set_pair(0, 1, Complex64::new(big, 0.0)),
            }
            sample.normalized().largest_eigenvalue()
        })
        .collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// One row of a concentration or Bennett table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub t: f64,
    pub frequency: f64,
    pub bound: f64,
    /// Binomial standard error at the bound, `sqrt(p (1-p) / trials)` with `p = min(bound, 1)`.
    pub se: f64,
    pub holds: bool,
}

impl BoundRow {
    fn new(t: f64, hits: usize, trials: usize, bound: f64) -> Self {
        let p = bound.min(1.0);
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        let frequency = hits as f64 / trials as f64;
        Self { t, frequency, bound, se, holds: frequency <= bound + 3.0 * se }
    }
}

/// `2 exp(-t^2 / (32 K^2))`.
pub fn concentration_bound(k: f64, t: f64) -> f64 {
    2.0 * (-t * t / (32.0 * k * k)).exp()
}

/// Frequency of `|lambda - mean(lambda)| > t` for symmetric matrices with
/// independent entries `+-K` (diagonal included), against
/// [`concentration_bound`].
pub fn concentration_check(n: usize, k: f64, t_grid: &[f64], trials: usize, seed: u64) -> Result<Vec<BoundRow>> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParams("N and trials must be positive".into()));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParams(format!("entry bound must be positive, got {k}")));
    }
    let lambdas: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_stream(seed, n, t);
            let mut signs = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let s = if rng.random::<bool>() { k } else { -k };
                    signs[i * n + j] = s;
                    signs[j * n + i] = s;
                }
            }
            Hermitian::from_real_fn(n, |i, j| signs[i * n + j])?.largest_eigenvalue()
        })
        .collect::<Result<_>>()?;
    let m = mean(&lambdas);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let hits = lambdas.iter().filter(|&&l| (l - m).abs() > t).count();
            BoundRow::new(t, hits, trials, concentration_bound(k, t))
        })
        .collect())
}

/// `h(u) = (1+u) ln(1+u) - u`.
pub fn bennett_h(u: f64) -> f64 {
    (1.0 + u) * u.ln_1p() - u
}

/// `exp(-(v / b^2) h(b t / v))`.
pub fn bennett_bound(v: f64, b_cap: f64, t: f64) -> Result<f64> {
    if !(v > 0.0 && b_cap > 0.0 && v.is_finite() && b_cap.is_finite()) {
        return Err(Error::InvalidParams(format!("need v, b > 0, got v = {v}, b = {b_cap}")));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("t must be nonnegative, got {t}")));
    }
    Ok((-(v / (b_cap * b_cap)) * bennett_h(b_cap * t / v)).exp())
}

/// Upper tail of a sum of `terms` centred Bernoulli(`p`) variables against
/// [`bennett_bound`] with `v = terms p (1-p)` and `b = max(p, 1-p)`.
pub fn bennett_check(terms: usize, p: f64, t_grid: &[f64], trials: usize, seed: u64) -> Result<Vec<BoundRow>> {
    if terms == 0 || trials == 0 || !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParams("need terms, trials >= 1 and p in (0,1)".into()));
    }
    let sums: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_stream(seed, terms, t);
            let hits = (0..terms).filter(|_| rng.random::<f64>() < p).count();
            hits as f64 - terms as f64 * p
        })
        .collect();
    let v = terms as f64 * p * (1.0 - p);
    let b_cap = p.max(1.0 - p);
    t_grid
        .iter()
        .map(|&t| {
            let hits = sums.iter().filter(|&&s| s > t).count();
            Ok(BoundRow::new(t, hits, trials, bennett_bound(v, b_cap, t)?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSlope {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    /// `J(x)` when `c` is known, else `None`.
    pub j_reference: Option<f64>,
}

/// Least-squares line `-ln p = slope N^(alpha/2) + intercept` over points
/// with `p > 0`. Needs at least three distinct `N`.
pub fn fit_rate_slope(ns: &[usize], p_hats: &[f64], alpha: f64) -> Result<(f64, f64, usize)> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(p_hats)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&n, &p)| ((n as f64).powf(alpha / 2.0), -p.ln()))
        .collect();
    let mut distinct: Vec<usize> = ns.iter().zip(p_hats).filter(|(_, &p)| p > 0.0).map(|(&n, _)| n).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::NotEstimable(format!(
            "need at least 3 sizes with a nonzero tail estimate, have {}",
            distinct.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx, pts.len()))
}

/// Slope of `-ln p_hat(x)` against `N^(alpha/2)` across records, next to
/// `J(x)` computed with the constant `c` when one is supplied.
pub fn rate_slope_summary(records: &[ExperimentRecord], x: f64, c: Option<f64>) -> Result<RateSlope> {
    let first = records.first().ok_or_else(|| Error::NotEstimable("no records".into()))?;
    let alpha = first.params.alpha;
    let mut ns = Vec::new();
    let mut ps = Vec::new();
    for r in records {
        let e = r
            .estimate_at(x)
            .ok_or_else(|| Error::InvalidParams(format!("record for N = {} has no estimate at x = {x}", r.n)))?;
        ns.push(r.n);
        ps.push(e.p_hat);
    }
    let (slope, intercept, points) = fit_rate_slope(&ns, &ps, alpha)?;
    let j_reference = match c {
        Some(c) => Some(rate_j(x, &RateFunctionParams::new(alpha, c)?)),
        None => None,
    };
    Ok(RateSlope { slope, intercept, points, j_reference })
}
