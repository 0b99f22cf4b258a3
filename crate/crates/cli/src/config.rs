//! Flat run configuration: TOML file values, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// A number or a list of numbers (`kappa = 0.05` or `kappa = [0, 0.05]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::One(v) => vec![*v],
            Self::Many(v) => v.clone(),
        }
    }
}

/// A duration (`T = 7`) or an inclusive range (`T = "1:7:0.1"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DurationSpec {
    Value(f64),
    Text(String),
}

impl DurationSpec {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Self::Value(v) => Ok(vec![*v]),
            Self::Text(s) => parse_grid(s),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Option<String>,
    pub knots: Option<[f64; 3]>,
    pub alpha: Option<f64>,
    pub kappa: Option<OneOrMany>,
    pub omega: Option<f64>,
    #[serde(rename = "T")]
    pub duration: Option<DurationSpec>,
    pub segments: Option<usize>,
    pub seeds: Option<usize>,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub samples: Option<usize>,
    pub stride: Option<usize>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_step: Option<f64>,
    pub bounds: Option<[f64; 2]>,
    pub epsilon: Option<f64>,
    pub t_max: Option<f64>,
    pub u: Option<f64>,
    pub j: Option<f64>,
    pub schedule: Option<PathBuf>,
    pub amplitudes: Option<Vec<f64>>,
    pub reoptimize: Option<bool>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub json: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr; $($f:ident),* $(,)?) => {
        RunConfig { $($f: $hi.$f.or($lo.$f),)* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
    }

    /// Values set in `self` win over `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        overlay!(self, base; profile, knots, alpha, kappa, omega, duration, segments, seeds, seed, steps,
                 samples, stride, grid_min, grid_max, grid_step, bounds, epsilon, t_max, u, j, schedule,
                 amplitudes, reoptimize, out, json)
    }

    /// SHA-256 of the resolved settings (output paths excluded).
    pub fn hash(&self, command: &str) -> String {
        use sha2::{Digest, Sha256};
        let body = serde_json::to_string(&(command, self)).expect("config serializes");
        Sha256::digest(body.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("{what}: cannot parse '{p}' as a number")))
        })
        .collect()
}

pub fn parse_fixed<const N: usize>(s: &str, what: &str) -> Result<[f64; N], CliError> {
    let v = parse_list(s, what)?;
    v.try_into().map_err(|v: Vec<f64>| {
        CliError::config(format!(
            "{what}: expected {N} comma-separated values, got {}",
            v.len()
        ))
    })
}

/// `a:b:step` inclusive, or a single number.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts = parse_list(&s.replace(':', ","), "T")?;
    match parts[..] {
        [v] => Ok(vec![v]),
        [a, b, step] if step > 0.0 && b >= a => {
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| a + k as f64 * step).collect())
        }
        _ => Err(CliError::config(format!(
            "T: expected a number or start:stop:step, got '{s}'"
        ))),
    }
}
