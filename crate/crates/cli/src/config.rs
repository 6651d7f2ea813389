//! key=value run configuration with `#` comments.

use std::collections::BTreeMap;
use std::fmt;

/// Every key the runner understands.
pub const KEYS: &[&str] = &[
    "L", "N", "M", "T", "beta", "sigma", "epsilon", "omega", "plateau_margin", "n", "R0", "eta", "fp_tol", "max_iter", "f", "seed",
    "output", "quad_points", "bump", "samples", "C", "n_sweep", "profile_start", "profile_end", "inner_M", "amplitude",
];

#[derive(Debug)]
pub enum ConfigError {
    Parse { line: usize, msg: String },
    UnknownKey(String),
    Missing(String),
    Invalid { key: String, msg: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, msg } => write!(f, "config line {line}: {msg}"),
            ConfigError::UnknownKey(k) => write!(f, "unknown config key '{k}'"),
            ConfigError::Missing(k) => write!(f, "missing config key '{k}'"),
            ConfigError::Invalid { key, msg } => write!(f, "invalid value for '{key}': {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Parse { line: i + 1, msg: format!("expected key=value, got '{line}'") })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey(k.to_string()));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Parse { line: i + 1, msg: format!("duplicate key '{k}'") });
            }
        }
        Ok(Self { values })
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| ConfigError::Invalid { key: key.into(), msg: e.to_string() }))
            .transpose()
    }

    pub fn f64_req(&self, key: &str) -> Result<f64, ConfigError> {
        self.parse_as(key)?.ok_or_else(|| ConfigError::Missing(key.into()))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.parse_as(key)?.unwrap_or(default))
    }

    pub fn usize_req(&self, key: &str) -> Result<usize, ConfigError> {
        self.parse_as(key)?.ok_or_else(|| ConfigError::Missing(key.into()))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.parse_as(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        Ok(self.parse_as(key)?.unwrap_or(default))
    }

    /// Comma-separated numbers.
    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| ConfigError::Invalid { key: key.into(), msg: e.to_string() }))
                .collect(),
        }
    }

    /// Intervals written as a:b separated by commas, e.g. `0.5:1.5,2:2.5`.
    pub fn intervals_or(&self, key: &str, default: &[(f64, f64)]) -> Result<Vec<(f64, f64)>, ConfigError> {
        let Some(v) = self.values.get(key) else {
            return Ok(default.to_vec());
        };
        v.split(',')
            .map(|part| {
                let (a, b) = part.split_once(':').ok_or_else(|| ConfigError::Invalid { key: key.into(), msg: format!("expected a:b, got '{part}'") })?;
                let p = |s: &str| s.trim().parse::<f64>().map_err(|e| ConfigError::Invalid { key: key.into(), msg: e.to_string() });
                Ok((p(a)?, p(b)?))
            })
            .collect()
    }
}
