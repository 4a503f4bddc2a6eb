//! Flat `key=value` experiment configuration.
//!
//! Resolution order: built-in defaults for the experiment, then the config
//! file, then command-line overrides, then `--scale`.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mmmcmc_core::analysis::KernelNormalization;
use mmmcmc_core::mcmc::EstimatorMode;
use thiserror::Error;

use crate::Experiment;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{origin}: line {line} is not key=value: {text:?}")]
    Syntax { origin: String, line: usize, text: String },
    #[error("{origin}: unknown key {key:?}")]
    UnknownKey { origin: String, key: String },
    #[error("{key}: cannot parse {value:?}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("flag --{0} has no value")]
    MissingValue(String),
    #[error("unexpected argument {0:?}; overrides are --key value")]
    StrayArgument(String),
    #[error("{key}: {reason}")]
    Validation { key: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Butane,
    Alkane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MubarChoice {
    Exact,
    Uniform,
}

/// Every knob of every experiment. Keys in files and flags use the field
/// names listed in [`KEYS`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemKind,
    pub n_carbons: usize,
    pub temperature: f64,
    pub mubar: MubarChoice,
    pub estimator: EstimatorMode,
    pub dt_macro: f64,
    /// λ in units of k_b.
    pub lambda_factor: f64,
    /// δt·λ.
    pub dt_micro_factor: f64,
    pub k_recon: usize,
    /// `None` follows the reconstruction length.
    pub k_eval: Option<usize>,
    /// `None` is `sqrt(1/(2λ))`.
    pub bin_width: Option<f64>,
    pub n_steps: u64,
    pub n_runs: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub n_values: Vec<usize>,
    pub k_values: Vec<usize>,
    /// MALA step times λ.
    pub mala_dt_factor: f64,
    pub kernel_epsilon: f64,
    pub kernel_grid: usize,
    pub kernel_normalization: KernelNormalization,
    pub hist_bins: usize,
}

/// Recognised keys, in manifest order.
pub const KEYS: &[&str] = &[
    "system",
    "n_carbons",
    "temperature",
    "mubar",
    "estimator",
    "dt_macro",
    "lambda_factor",
    "dt_micro_factor",
    "K_recon",
    "K_eval",
    "bin_width",
    "n_steps",
    "n_runs",
    "seed",
    "output_dir",
    "N_values",
    "K_values",
    "mala_dt_factor",
    "kernel_epsilon",
    "kernel_grid",
    "kernel_normalization",
    "hist_bins",
];

impl ExperimentConfig {
    /// Paper parameters for `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            system: SystemKind::Butane,
            n_carbons: 4,
            temperature: 300.0,
            mubar: MubarChoice::Exact,
            estimator: EstimatorMode::Exact,
            dt_macro: 0.001,
            lambda_factor: 2.0,
            dt_micro_factor: 0.01,
            k_recon: 15,
            k_eval: None,
            bin_width: None,
            n_steps: 1_000_000,
            n_runs: 1,
            seed: 20_240_601,
            output_dir: PathBuf::from("out"),
            n_values: (4..=45).collect(),
            k_values: vec![10, 20, 40, 100, 200],
            mala_dt_factor: 0.01,
            kernel_epsilon: 0.02,
            kernel_grid: 628,
            kernel_normalization: KernelNormalization::NadarayaWatson,
            hist_bins: 60,
        };
        match experiment {
            Experiment::ButaneHist | Experiment::QlambdaScatter => base,
            Experiment::AccVsN => Self {
                system: SystemKind::Alkane,
                k_recon: 20,
                n_steps: 100_000,
                n_runs: 100,
                ..base
            },
            Experiment::AccVsK => Self { system: SystemKind::Alkane, n_steps: 100_000, n_runs: 100, ..base },
            Experiment::VarVsK => Self {
                system: SystemKind::Alkane,
                n_carbons: 8,
                k_recon: 20,
                k_values: vec![10, 20, 40, 100, 200, 400, 1000, 2000],
                n_steps: 100_000,
                n_runs: 100,
                ..base
            },
            Experiment::EffGain => Self { system: SystemKind::Alkane, n_steps: 100_000, n_runs: 100, ..base },
            Experiment::MalaBaseline => Self { n_steps: 100_000, n_runs: 100, ..base },
        }
    }

    /// Defaults, then `file` (if any), then `overrides`.
    pub fn resolve(experiment: Experiment, file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut cfg = Self::defaults(experiment);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        for (k, v) in overrides {
            cfg.set(k, v, "command line")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: origin.to_owned(),
                line: i + 1,
                text: raw.to_owned(),
            })?;
            self.set(k.trim(), v.trim(), origin)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        match key {
            "system" => {
                self.system = match value {
                    "butane" => SystemKind::Butane,
                    "alkane" => SystemKind::Alkane,
                    _ => return Err(invalid(key, value, "expected butane or alkane")),
                }
            }
            "n_carbons" => self.n_carbons = parse(key, value)?,
            "temperature" => self.temperature = parse(key, value)?,
            "mubar" => {
                self.mubar = match value {
                    "exact" => MubarChoice::Exact,
                    "uniform" => MubarChoice::Uniform,
                    _ => return Err(invalid(key, value, "expected exact or uniform")),
                }
            }
            "estimator" => {
                self.estimator = match value {
                    "exact" => EstimatorMode::Exact,
                    "reuse" => EstimatorMode::Reuse,
                    _ => return Err(invalid(key, value, "expected exact or reuse")),
                }
            }
            "dt_macro" => self.dt_macro = parse(key, value)?,
            "lambda_factor" => self.lambda_factor = parse(key, value)?,
            "dt_micro_factor" => self.dt_micro_factor = parse(key, value)?,
            "K_recon" => self.k_recon = parse(key, value)?,
            "K_eval" => self.k_eval = parse_auto(key, value)?,
            "bin_width" => self.bin_width = parse_auto(key, value)?,
            "n_steps" => self.n_steps = parse(key, value)?,
            "n_runs" => self.n_runs = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "N_values" => self.n_values = parse_list(key, value)?,
            "K_values" => self.k_values = parse_list(key, value)?,
            "mala_dt_factor" => self.mala_dt_factor = parse(key, value)?,
            "kernel_epsilon" => self.kernel_epsilon = parse(key, value)?,
            "kernel_grid" => self.kernel_grid = parse(key, value)?,
            "kernel_normalization" => {
                self.kernel_normalization = match value {
                    "nadaraya-watson" => KernelNormalization::NadarayaWatson,
                    "per-sample" => KernelNormalization::PerSample,
                    _ => return Err(invalid(key, value, "expected nadaraya-watson or per-sample")),
                }
            }
            "hist_bins" => self.hist_bins = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey { origin: origin.to_owned(), key: key.to_owned() }),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("temperature", self.temperature),
            ("dt_macro", self.dt_macro),
            ("lambda_factor", self.lambda_factor),
            ("dt_micro_factor", self.dt_micro_factor),
            ("mala_dt_factor", self.mala_dt_factor),
            ("kernel_epsilon", self.kernel_epsilon),
            ("bin_width", self.bin_width.unwrap_or(1.0)),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Validation { key, reason: format!("must be positive, got {v}") });
            }
        }
        let counts = [
            ("K_recon", self.k_recon as u64),
            ("K_eval", self.k_eval.unwrap_or(1) as u64),
            ("n_steps", self.n_steps),
            ("n_runs", self.n_runs as u64),
            ("kernel_grid", self.kernel_grid as u64),
            ("hist_bins", self.hist_bins as u64),
        ];
        for (key, v) in counts {
            if v == 0 {
                return Err(ConfigError::Validation { key, reason: "must be at least 1".into() });
            }
        }
        if self.n_carbons < 4 {
            return Err(ConfigError::Validation { key: "n_carbons", reason: format!("need at least 4, got {}", self.n_carbons) });
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 4) {
            return Err(ConfigError::Validation { key: "N_values", reason: format!("need at least 4 carbons, got {n}") });
        }
        if self.n_values.is_empty() {
            return Err(ConfigError::Validation { key: "N_values", reason: "empty list".into() });
        }
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return Err(ConfigError::Validation { key: "K_values", reason: "need a non-empty list of positive values".into() });
        }
        Ok(())
    }

    /// Divides `n_steps` and `n_runs` by `factor`, rounding up, never below 1.
    pub fn scaled(mut self, factor: f64) -> Result<Self, ConfigError> {
        if !(factor >= 1.0 && factor.is_finite()) {
            return Err(ConfigError::Validation { key: "scale", reason: format!("must be ≥ 1, got {factor}") });
        }
        self.n_steps = ((self.n_steps as f64 / factor).ceil() as u64).max(1);
        self.n_runs = ((self.n_runs as f64 / factor).ceil() as usize).max(1);
        Ok(self)
    }

    /// `key=value` lines for every key, in [`KEYS`] order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        let auto = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        let values = [
            match self.system {
                SystemKind::Butane => "butane".to_string(),
                SystemKind::Alkane => "alkane".to_string(),
            },
            self.n_carbons.to_string(),
            self.temperature.to_string(),
            match self.mubar {
                MubarChoice::Exact => "exact".to_string(),
                MubarChoice::Uniform => "uniform".to_string(),
            },
            match self.estimator {
                EstimatorMode::Exact => "exact".to_string(),
                EstimatorMode::Reuse => "reuse".to_string(),
            },
            self.dt_macro.to_string(),
            self.lambda_factor.to_string(),
            self.dt_micro_factor.to_string(),
            self.k_recon.to_string(),
            auto(self.k_eval.map(|k| k.to_string())),
            auto(self.bin_width.map(|h| h.to_string())),
            self.n_steps.to_string(),
            self.n_runs.to_string(),
            self.seed.to_string(),
            self.output_dir.display().to_string(),
            list(&self.n_values),
            list(&self.k_values),
            self.mala_dt_factor.to_string(),
            self.kernel_epsilon.to_string(),
            self.kernel_grid.to_string(),
            match self.kernel_normalization {
                KernelNormalization::NadarayaWatson => "nadaraya-watson".to_string(),
                KernelNormalization::PerSample => "per-sample".to_string(),
            },
            self.hist_bins.to_string(),
        ];
        KEYS.iter().copied().zip(values).collect()
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        for (k, v) in self.to_key_values() {
            writeln!(s, "{k}={v}")?;
        }
        f.write_str(&s)
    }
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_owned(), value: value.to_owned(), reason: reason.into() }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| invalid(key, value, e.to_string()))
}

fn parse_auto<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    if value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    value.split(',').map(|s| parse(key, s.trim())).collect()
}

/// Splits `--key value` and `--key=value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            return Err(ConfigError::StrayArgument(arg.clone()));
        };
        match flag.split_once('=') {
            Some((k, v)) => out.push((k.to_owned(), v.to_owned())),
            None => {
                let v = it.next().ok_or_else(|| ConfigError::MissingValue(flag.to_owned()))?;
                out.push((flag.to_owned(), v.clone()));
            }
        }
    }
    Ok(out)
}
