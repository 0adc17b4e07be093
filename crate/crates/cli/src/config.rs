//! Run configurations. Each command reads an optional JSON file given by
//! `--config`; command-line flags override the file and the file overrides
//! the built-in defaults.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use htldp::heavy_tail::{EntryLaw, TailParams};

use crate::CliError;

/// Overlays the non-null fields of `flags` on the file object and
/// deserializes the result. Keys are snake_case field names.
pub fn merge<T: DeserializeOwned>(file: Option<&Value>, flags: &impl Serialize) -> Result<T, CliError> {
    let mut base = match file {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(CliError::Validation("config file must hold a JSON object".into())),
        None => serde_json::Map::new(),
    };
    if let Value::Object(m) = serde_json::to_value(flags).map_err(|e| CliError::Validation(e.to_string()))? {
        for (k, v) in m {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Validation(format!("configuration: {e}")))
}

pub fn load_file(path: Option<&Path>) -> Result<Option<Value>, CliError> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Validation(format!("{} is not valid JSON: {e}", path.display())))
}

/// Parses a phase: `1`, `-1`, `i`, `-i` (optional `+`), or `polar:<angle>`.
pub fn parse_phase(s: &str) -> Result<Complex64, CliError> {
    let t = s.trim();
    let t = t.strip_prefix('+').unwrap_or(t);
    match t {
        "1" | "1.0" => Ok(Complex64::new(1.0, 0.0)),
        "-1" | "-1.0" => Ok(Complex64::new(-1.0, 0.0)),
        "i" => Ok(Complex64::new(0.0, 1.0)),
        "-i" => Ok(Complex64::new(0.0, -1.0)),
        _ => {
            if let Some(angle) = t.strip_prefix("polar:") {
                let a: f64 = angle
                    .parse()
                    .map_err(|_| CliError::Validation(format!("bad angle in phase '{s}'")))?;
                Ok(Complex64::from_polar(1.0, a))
            } else {
                Err(CliError::Validation(format!("unrecognised phase '{s}' (use 1, -1, i, -i or polar:<angle>)")))
            }
        }
    }
}

fn default_alpha() -> f64 {
    1.0
}
fn one() -> f64 {
    1.0
}
fn plus_one() -> Vec<String> {
    vec!["1".into()]
}
fn both_signs() -> Vec<String> {
    vec!["1".into(), "-1".into()]
}

/// The statistical model as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    /// Defaults to `min(a, b) / 2`.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default = "plus_one")]
    pub nu1: Vec<String>,
    #[serde(default = "both_signs")]
    pub nu2: Vec<String>,
    #[serde(default)]
    pub complex: bool,
    #[serde(default)]
    pub law: EntryLaw,
}

impl ModelConfig {
    pub fn params(&self) -> Result<TailParams, CliError> {
        let nu1 = self.nu1.iter().map(|s| parse_phase(s)).collect::<Result<Vec<_>, _>>()?;
        let nu2 = self.nu2.iter().map(|s| parse_phase(s)).collect::<Result<Vec<_>, _>>()?;
        let kappa = self.kappa.unwrap_or(0.5 * self.a.min(self.b));
        Ok(TailParams::new(self.alpha, self.a, self.b, kappa, nu1, nu2, self.complex)?)
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("htldp-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    #[serde(flatten)]
    pub model: ModelConfig,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default = "rate_grid")]
    pub x: Vec<f64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn rate_grid() -> Vec<f64> {
    (0..=60).map(|k| 1.5 + 0.05 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    #[serde(flatten)]
    pub model: ModelConfig,
    /// Run the brute-force oracle up to this matrix size.
    #[serde(default)]
    pub oracle: Option<usize>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

fn default_restarts() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbpConfig {
    #[serde(flatten)]
    pub model: ModelConfig,
    #[serde(default = "theta_grid")]
    pub theta: Vec<f64>,
    #[serde(default = "default_bbp_n")]
    pub n: usize,
    #[serde(default = "default_bbp_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub planting: htldp::experiments::Planting,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn theta_grid() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0]
}
fn default_bbp_n() -> usize {
    500
}
fn default_bbp_trials() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    #[serde(flatten)]
    pub model: ModelConfig,
    #[serde(default = "tail_ns")]
    pub n: Vec<usize>,
    #[serde(default = "tail_xs")]
    pub x: Vec<f64>,
    #[serde(default = "default_tail_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn tail_ns() -> Vec<usize> {
    vec![100, 200, 400]
}
fn tail_xs() -> Vec<f64> {
    vec![2.1, 2.3, 2.5]
}
fn default_tail_trials() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyConfig {
    #[serde(flatten)]
    pub model: ModelConfig,
    #[serde(default = "iso_ns")]
    pub n: Vec<usize>,
    #[serde(default = "iso_x")]
    pub x: f64,
    #[serde(default = "default_iso_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn iso_ns() -> Vec<usize> {
    vec![100, 200, 400]
}
fn iso_x() -> f64 {
    3.0
}
fn default_iso_trials() -> usize {
    10
}
