//! Flat `key = value` configuration files and option precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Keys a configuration file may set; they mirror the long flag names.
const KEYS: &[&str] = &[
    "alpha", "x", "t", "v", "seed", "out", "format", "y-min", "y-max", "y-steps", "ell-min", "ell-max",
    "ell-steps", "side", "n-samples", "steps", "tie-rule", "checks",
];

pub const SEED_ENV: &str = "SKEWBM_SEED";

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|msg| CliError::Usage(format!("{}: {msg}", path.display())))
    }

    /// Blank lines and lines starting with `#` are skipped. Keys may use
    /// `_` or `-`; a key may appear only once.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key '{key}'", i + 1));
            }
            let value = value.trim().trim_matches('"').to_string();
            if values.insert(key.clone(), value).is_some() {
                return Err(format!("line {}: duplicate key '{key}'", i + 1));
            }
        }
        Ok(Self { values })
    }
}

/// Applies the precedence flag > config file > default (with the seed
/// environment variable slotted in before the default).
pub struct Resolver {
    file: ConfigFile,
}

impl Resolver {
    pub fn new(file: ConfigFile) -> Self {
        Self { file }
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.file.values.get(key).cloned()
    }

    pub fn get<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.values.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Usage(format!("config key '{key}': cannot parse '{raw}'"))),
            None => Ok(default),
        }
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if flag.is_some() || self.file.values.contains_key("seed") {
            return self.get("seed", flag, 0);
        }
        match std::env::var(SEED_ENV) {
            Ok(raw) => raw
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}: cannot parse '{raw}' as a seed"))),
            Err(_) => Ok(0),
        }
    }
}
