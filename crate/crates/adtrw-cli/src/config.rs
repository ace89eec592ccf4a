//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` comments, no nesting. Command-line flags
//! override config values; the resolved configuration is echoed into every
//! output header so runs can be reproduced from their artifacts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Keys any config file may set. Unknown keys are rejected loudly rather
/// than ignored.
pub const KNOWN_KEYS: &[&str] = &[
    "density",
    "horizon",
    "t",
    "t_max",
    "n_max",
    "r_max",
    "sites",
    "samples",
    "seed",
    "beta",
    "mu",
    "xi0",
    "fig",
    "f",
    "wplus",
    "wminus",
    "out",
    "format",
    "summary_out",
    "est_csv",
    "recurrence_tol",
];

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError {
        message: msg.into(),
    }
}

/// Parsed configuration: key -> (value, line number).
#[derive(Debug, Default, Clone)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                err(format!(
                    "{origin}:{lineno}: expected `key = value`, got `{raw}`"
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(err(format!("{origin}:{lineno}: unknown key `{key}`")));
            }
            if let Some((_, first)) = entries.get(&key) {
                return Err(err(format!(
                    "{origin}:{lineno}: duplicate key `{key}` (first set at line {first})"
                )));
            }
            entries.insert(key, (value, lineno));
        }
        Ok(ExperimentConfig { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn typed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|_| {
                err(format!(
                    "config line {line}: key `{key}` = `{v}` is not a valid {what}"
                ))
            }),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.typed(key, "real number")
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.typed(key, "non-negative integer")
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.typed(key, "non-negative integer")
    }

    pub fn get_string(&self, key: &str) -> Option<String> {
        self.entries.get(key).map(|(v, _)| v.clone())
    }

    /// Every (key, value) pair, for echoing into output headers.
    pub fn echo(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries
            .iter()
            .map(|(k, (v, _))| (k.as_str(), v.as_str()))
    }
}
